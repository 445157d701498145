#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eprsim::kern {

/// Shot-loop kernels exist in a scalar reference version and an AVX2
/// version selected at runtime.  Both produce bit-identical output: the
/// vector path only batches the Philox keystream and the threshold
/// compares, it never reorders or refactors the floating-point work.
enum class Backend { scalar, avx2 };

Backend active_backend();
std::string backend_name(Backend b);

/// Force a backend (for equivalence tests).  Returns false if the
/// requested backend is not available on this machine.  Passing nullopt
/// restores automatic selection.  EPRSIM_NO_AVX2=1 in the environment
/// disables the AVX2 path entirely.
bool set_backend(std::optional<Backend> b);

/// Fill `out` with n_blocks * 4 Philox words for counters
/// {shot_base + i, stream, draw}, i = 0..n_blocks-1.
void philox_fill(std::uint64_t seed, std::uint32_t stream, std::uint32_t draw,
                 std::uint64_t shot_base, std::size_t n_blocks, std::uint32_t* out);

/// One uniform double per shot: u(shot) = words 0,1 of the shot's block.
void uniform_fill(std::uint64_t seed, std::uint32_t stream, std::uint32_t draw,
                  std::uint64_t shot_base, std::size_t n_shots, double* out);

/// Draw `n_shots` samples from the categorical distribution whose
/// inclusive CDF is `cdf` (cdf.back() == 1), tallying counts per bin.
/// Bin of u = first j with u < cdf[j].
void categorical_tally(std::uint64_t seed, std::uint32_t stream,
                       std::uint64_t shot_base, std::uint64_t n_shots,
                       std::span<const double> cdf, std::uint64_t* counts);

/// Standard-normal pairs, `draws_per_shot` pairs per shot, laid out
/// out[shot * 2 * draws_per_shot + 2 * draw + {0,1}].  The Box-Muller
/// transform is always scalar; only the keystream is vectorized.
void normal_fill(std::uint64_t seed, std::uint32_t stream, std::uint64_t shot_base,
                 std::uint64_t n_shots, std::uint32_t draws_per_shot, double* out);

/// Deterministic parallel block runner.  Items are cut into fixed blocks
/// of `block_size` by index; workers pull blocks from an atomic cursor, so
/// any partials the caller stores per block land in index-addressed slots
/// and can be folded in a fixed order afterwards.  Results are therefore
/// independent of the worker count.
void for_blocks(std::uint64_t n_items, std::uint64_t block_size, unsigned workers,
                const std::function<void(std::uint64_t block_index, std::uint64_t begin,
                                         std::uint64_t end)>& fn);

/// Worker-count resolution: explicit value wins, else EPRSIM_WORKERS, else
/// hardware concurrency (clamped to 8).
unsigned resolve_workers(std::optional<unsigned> requested);

constexpr std::uint64_t default_block_size = 8192;

}  // namespace eprsim::kern
