// AVX2 variants of the shot kernels.  Eight Philox counters run per
// iteration in struct-of-arrays form.  Word-for-word output order matches
// the scalar reference; the equivalence suite asserts bitwise identity.

#include "eprsim/kernels.hpp"
#include "eprsim/rng.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <array>
#include <cstring>

namespace eprsim::kern::detail {

namespace {

struct PhiloxVec {
    __m256i c0, c1, c2, c3;
};

// 32x32 -> 64 multiply on all eight lanes of `a` by the broadcast
// constant `m`, returning low and high product words per lane.
inline void mul_full(__m256i a, __m256i m, __m256i& lo, __m256i& hi) {
    const __m256i prod_even = _mm256_mul_epu32(a, m);
    const __m256i prod_odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
    lo = _mm256_blend_epi32(prod_even, _mm256_slli_epi64(prod_odd, 32), 0xAA);
    hi = _mm256_blend_epi32(_mm256_srli_epi64(prod_even, 32), prod_odd, 0xAA);
}

inline PhiloxVec philox8(PhiloxVec v, rng::PhiloxKey key) {
    const __m256i m0 = _mm256_set1_epi32(static_cast<int>(0xD2511F53u));
    const __m256i m1 = _mm256_set1_epi32(static_cast<int>(0xCD9E8D57u));
    __m256i k0 = _mm256_set1_epi32(static_cast<int>(key.k0));
    __m256i k1 = _mm256_set1_epi32(static_cast<int>(key.k1));
    const __m256i w0 = _mm256_set1_epi32(static_cast<int>(0x9E3779B9u));
    const __m256i w1 = _mm256_set1_epi32(static_cast<int>(0xBB67AE85u));

    for (int round = 0; round < 10; ++round) {
        __m256i lo0, hi0, lo1, hi1;
        mul_full(v.c0, m0, lo0, hi0);
        mul_full(v.c2, m1, lo1, hi1);
        PhiloxVec next;
        next.c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, v.c1), k0);
        next.c1 = lo1;
        next.c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, v.c3), k1);
        next.c3 = lo0;
        v = next;
        k0 = _mm256_add_epi32(k0, w0);
        k1 = _mm256_add_epi32(k1, w1);
    }
    return v;
}

inline PhiloxVec load_counters(std::uint64_t shot_base, std::uint32_t stream,
                               std::uint32_t draw) {
    alignas(32) std::uint32_t lo[8];
    alignas(32) std::uint32_t hi[8];
    for (int lane = 0; lane < 8; ++lane) {
        const std::uint64_t shot = shot_base + static_cast<std::uint64_t>(lane);
        lo[lane] = static_cast<std::uint32_t>(shot);
        hi[lane] = static_cast<std::uint32_t>(shot >> 32);
    }
    PhiloxVec v;
    v.c0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lo));
    v.c1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(hi));
    v.c2 = _mm256_set1_epi32(static_cast<int>(stream));
    v.c3 = _mm256_set1_epi32(static_cast<int>(draw));
    return v;
}

inline void store_words(const PhiloxVec& v, std::uint32_t* out8x4) {
    alignas(32) std::uint32_t w0[8], w1[8], w2[8], w3[8];
    _mm256_store_si256(reinterpret_cast<__m256i*>(w0), v.c0);
    _mm256_store_si256(reinterpret_cast<__m256i*>(w1), v.c1);
    _mm256_store_si256(reinterpret_cast<__m256i*>(w2), v.c2);
    _mm256_store_si256(reinterpret_cast<__m256i*>(w3), v.c3);
    for (int lane = 0; lane < 8; ++lane) {
        out8x4[4 * lane + 0] = w0[lane];
        out8x4[4 * lane + 1] = w1[lane];
        out8x4[4 * lane + 2] = w2[lane];
        out8x4[4 * lane + 3] = w3[lane];
    }
}

// First uniform of each of the eight blocks.  The u64 -> double
// conversion happens in scalar code so it is bit-identical to the
// reference path; the cast is exact (53-bit operand).
inline void unit_doubles8(const PhiloxVec& v, double* out8) {
    alignas(32) std::uint32_t w0[8], w1[8];
    _mm256_store_si256(reinterpret_cast<__m256i*>(w0), v.c0);
    _mm256_store_si256(reinterpret_cast<__m256i*>(w1), v.c1);
    for (int lane = 0; lane < 8; ++lane) {
        out8[lane] = rng::to_unit_double(w0[lane], w1[lane]);
    }
}

}  // namespace

void philox_fill_scalar(std::uint64_t, std::uint32_t, std::uint32_t, std::uint64_t,
                        std::size_t, std::uint32_t*);
void uniform_fill_scalar(std::uint64_t, std::uint32_t, std::uint32_t, std::uint64_t,
                         std::size_t, double*);
void categorical_tally_scalar(std::uint64_t, std::uint32_t, std::uint64_t,
                              std::uint64_t, std::span<const double>, std::uint64_t*);

void philox_fill_avx2(std::uint64_t seed, std::uint32_t stream, std::uint32_t draw,
                      std::uint64_t shot_base, std::size_t n_blocks,
                      std::uint32_t* out) {
    const auto key = rng::key_from_seed(seed);
    std::size_t i = 0;
    for (; i + 8 <= n_blocks; i += 8) {
        const PhiloxVec v = philox8(load_counters(shot_base + i, stream, draw), key);
        store_words(v, out + 4 * i);
    }
    if (i < n_blocks) {
        philox_fill_scalar(seed, stream, draw, shot_base + i, n_blocks - i, out + 4 * i);
    }
}

void uniform_fill_avx2(std::uint64_t seed, std::uint32_t stream, std::uint32_t draw,
                       std::uint64_t shot_base, std::size_t n_shots, double* out) {
    const auto key = rng::key_from_seed(seed);
    std::size_t i = 0;
    for (; i + 8 <= n_shots; i += 8) {
        const PhiloxVec v = philox8(load_counters(shot_base + i, stream, draw), key);
        unit_doubles8(v, out + i);
    }
    if (i < n_shots) {
        uniform_fill_scalar(seed, stream, draw, shot_base + i, n_shots - i, out + i);
    }
}

void categorical_tally_avx2(std::uint64_t seed, std::uint32_t stream,
                            std::uint64_t shot_base, std::uint64_t n_shots,
                            std::span<const double> cdf, std::uint64_t* counts) {
    const auto key = rng::key_from_seed(seed);
    const std::size_t k = cdf.size();

    // counts_lt[j] = #(u < cdf[j]); bins are consecutive differences.
    std::array<std::uint64_t, 16> counts_lt{};
    std::uint64_t i = 0;
    alignas(32) double u[8];
    for (; i + 8 <= n_shots; i += 8) {
        const PhiloxVec v = philox8(load_counters(shot_base + i, stream, 0), key);
        unit_doubles8(v, u);
        const __m256d ulo = _mm256_load_pd(u);
        const __m256d uhi = _mm256_load_pd(u + 4);
        for (std::size_t j = 0; j + 1 < k; ++j) {
            const __m256d thr = _mm256_set1_pd(cdf[j]);
            const int mlo = _mm256_movemask_pd(_mm256_cmp_pd(ulo, thr, _CMP_LT_OQ));
            const int mhi = _mm256_movemask_pd(_mm256_cmp_pd(uhi, thr, _CMP_LT_OQ));
            counts_lt[j] += static_cast<std::uint64_t>(__builtin_popcount(mlo) +
                                                       __builtin_popcount(mhi));
        }
    }
    std::uint64_t prev = 0;
    for (std::size_t j = 0; j + 1 < k; ++j) {
        counts[j] += counts_lt[j] - prev;
        prev = counts_lt[j];
    }
    counts[k - 1] += (i - 0) - prev;

    if (i < n_shots) {
        categorical_tally_scalar(seed, stream, shot_base + i, n_shots - i, cdf, counts);
    }
}

}  // namespace eprsim::kern::detail

#endif  // x86_64
