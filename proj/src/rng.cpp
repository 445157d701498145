#include "eprsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace eprsim::rng {

std::pair<double, double> normal_pair(std::uint64_t seed, std::uint32_t stream,
                                      std::uint64_t shot, std::uint32_t draw) {
    const auto [u0, u1] = uniform_pair(seed, stream, shot, draw);
    // 1 - u0 is in (0, 1], so the log is finite.
    const double r = std::sqrt(-2.0 * std::log(1.0 - u0));
    const double phi = 2.0 * std::numbers::pi * u1;
    return {r * std::cos(phi), r * std::sin(phi)};
}

double UniformSource::next() {
    return uniform(seed_, stream_, shot_++, 0);
}

double UniformSource::next_normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const auto [z0, z1] = normal_pair(seed_, stream_, shot_++, 1);
    cached_normal_ = z1;
    has_cached_normal_ = true;
    return z0;
}

}  // namespace eprsim::rng
