#include "eprsim/kernels.hpp"
#include "eprsim/rng.hpp"

namespace eprsim::kern::detail {

void philox_fill_scalar(std::uint64_t seed, std::uint32_t stream, std::uint32_t draw,
                        std::uint64_t shot_base, std::size_t n_blocks,
                        std::uint32_t* out) {
    const auto key = rng::key_from_seed(seed);
    for (std::size_t i = 0; i < n_blocks; ++i) {
        const auto w = rng::philox4x32(rng::make_counter(shot_base + i, stream, draw), key);
        out[4 * i + 0] = w[0];
        out[4 * i + 1] = w[1];
        out[4 * i + 2] = w[2];
        out[4 * i + 3] = w[3];
    }
}

void uniform_fill_scalar(std::uint64_t seed, std::uint32_t stream, std::uint32_t draw,
                         std::uint64_t shot_base, std::size_t n_shots, double* out) {
    const auto key = rng::key_from_seed(seed);
    for (std::size_t i = 0; i < n_shots; ++i) {
        const auto w = rng::philox4x32(rng::make_counter(shot_base + i, stream, draw), key);
        out[i] = rng::to_unit_double(w[0], w[1]);
    }
}

void categorical_tally_scalar(std::uint64_t seed, std::uint32_t stream,
                              std::uint64_t shot_base, std::uint64_t n_shots,
                              std::span<const double> cdf, std::uint64_t* counts) {
    const auto key = rng::key_from_seed(seed);
    const std::size_t k = cdf.size();
    for (std::uint64_t i = 0; i < n_shots; ++i) {
        const auto w = rng::philox4x32(rng::make_counter(shot_base + i, stream, 0), key);
        const double u = rng::to_unit_double(w[0], w[1]);
        std::size_t bin = k - 1;
        for (std::size_t j = 0; j + 1 < k; ++j) {
            if (u < cdf[j]) {
                bin = j;
                break;
            }
        }
        ++counts[bin];
    }
}

}  // namespace eprsim::kern::detail
