#include "eprsim/kernels.hpp"
#include "eprsim/rng.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

namespace eprsim::kern {

namespace detail {

void philox_fill_scalar(std::uint64_t, std::uint32_t, std::uint32_t, std::uint64_t,
                        std::size_t, std::uint32_t*);
void uniform_fill_scalar(std::uint64_t, std::uint32_t, std::uint32_t, std::uint64_t,
                         std::size_t, double*);
void categorical_tally_scalar(std::uint64_t, std::uint32_t, std::uint64_t,
                              std::uint64_t, std::span<const double>, std::uint64_t*);

#if defined(EPRSIM_HAVE_AVX2)
void philox_fill_avx2(std::uint64_t, std::uint32_t, std::uint32_t, std::uint64_t,
                      std::size_t, std::uint32_t*);
void uniform_fill_avx2(std::uint64_t, std::uint32_t, std::uint32_t, std::uint64_t,
                       std::size_t, double*);
void categorical_tally_avx2(std::uint64_t, std::uint32_t, std::uint64_t, std::uint64_t,
                            std::span<const double>, std::uint64_t*);
#endif

}  // namespace detail

namespace {

bool avx2_available() {
#if defined(EPRSIM_HAVE_AVX2) && defined(__GNUC__)
    if (const char* env = std::getenv("EPRSIM_NO_AVX2"); env && env[0] == '1') {
        return false;
    }
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Backend& backend_state() {
    static Backend b = avx2_available() ? Backend::avx2 : Backend::scalar;
    return b;
}

}  // namespace

Backend active_backend() { return backend_state(); }

std::string backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

bool set_backend(std::optional<Backend> b) {
    if (!b) {
        backend_state() = avx2_available() ? Backend::avx2 : Backend::scalar;
        return true;
    }
    if (*b == Backend::avx2 && !avx2_available()) {
        return false;
    }
    backend_state() = *b;
    return true;
}

void philox_fill(std::uint64_t seed, std::uint32_t stream, std::uint32_t draw,
                 std::uint64_t shot_base, std::size_t n_blocks, std::uint32_t* out) {
#if defined(EPRSIM_HAVE_AVX2)
    if (active_backend() == Backend::avx2) {
        detail::philox_fill_avx2(seed, stream, draw, shot_base, n_blocks, out);
        return;
    }
#endif
    detail::philox_fill_scalar(seed, stream, draw, shot_base, n_blocks, out);
}

void uniform_fill(std::uint64_t seed, std::uint32_t stream, std::uint32_t draw,
                  std::uint64_t shot_base, std::size_t n_shots, double* out) {
#if defined(EPRSIM_HAVE_AVX2)
    if (active_backend() == Backend::avx2) {
        detail::uniform_fill_avx2(seed, stream, draw, shot_base, n_shots, out);
        return;
    }
#endif
    detail::uniform_fill_scalar(seed, stream, draw, shot_base, n_shots, out);
}

void categorical_tally(std::uint64_t seed, std::uint32_t stream, std::uint64_t shot_base,
                       std::uint64_t n_shots, std::span<const double> cdf,
                       std::uint64_t* counts) {
    if (cdf.empty() || cdf.size() > 16) {
        throw std::invalid_argument("categorical_tally: cdf size must be 1..16");
    }
#if defined(EPRSIM_HAVE_AVX2)
    if (active_backend() == Backend::avx2) {
        detail::categorical_tally_avx2(seed, stream, shot_base, n_shots, cdf, counts);
        return;
    }
#endif
    detail::categorical_tally_scalar(seed, stream, shot_base, n_shots, cdf, counts);
}

void normal_fill(std::uint64_t seed, std::uint32_t stream, std::uint64_t shot_base,
                 std::uint64_t n_shots, std::uint32_t draws_per_shot, double* out) {
    if (n_shots == 0 || draws_per_shot == 0) {
        return;
    }
    std::vector<std::uint32_t> words(4 * n_shots);
    for (std::uint32_t d = 0; d < draws_per_shot; ++d) {
        philox_fill(seed, stream, d, shot_base, n_shots, words.data());
        for (std::uint64_t i = 0; i < n_shots; ++i) {
            const double u0 = rng::to_unit_double(words[4 * i + 0], words[4 * i + 1]);
            const double u1 = rng::to_unit_double(words[4 * i + 2], words[4 * i + 3]);
            const double r = std::sqrt(-2.0 * std::log(1.0 - u0));
            const double phi = 2.0 * std::numbers::pi * u1;
            out[i * 2 * draws_per_shot + 2 * d + 0] = r * std::cos(phi);
            out[i * 2 * draws_per_shot + 2 * d + 1] = r * std::sin(phi);
        }
    }
}

void for_blocks(std::uint64_t n_items, std::uint64_t block_size, unsigned workers,
                const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>& fn) {
    if (n_items == 0) {
        return;
    }
    if (block_size == 0) {
        throw std::invalid_argument("for_blocks: block_size must be positive");
    }
    const std::uint64_t n_blocks = (n_items + block_size - 1) / block_size;
    if (workers <= 1 || n_blocks == 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) {
            fn(b, b * block_size, std::min(n_items, (b + 1) * block_size));
        }
        return;
    }
    std::atomic<std::uint64_t> cursor{0};
    auto run = [&] {
        for (;;) {
            const std::uint64_t b = cursor.fetch_add(1, std::memory_order_relaxed);
            if (b >= n_blocks) {
                return;
            }
            fn(b, b * block_size, std::min(n_items, (b + 1) * block_size));
        }
    };
    std::vector<std::thread> pool;
    const unsigned n_threads = static_cast<unsigned>(
        std::min<std::uint64_t>(workers, n_blocks));
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        pool.emplace_back(run);
    }
    for (auto& th : pool) {
        th.join();
    }
}

unsigned resolve_workers(std::optional<unsigned> requested) {
    if (requested && *requested > 0) {
        return *requested;
    }
    if (const char* env = std::getenv("EPRSIM_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : std::min(hw, 8u);
}

}  // namespace eprsim::kern
