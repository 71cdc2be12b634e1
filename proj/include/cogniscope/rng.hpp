#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cogniscope {

/// Random engine used everywhere. mt19937_64 gives byte-identical streams for
/// a given seed on every platform; distributions are libstdc++'s.
using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// Derives an independent stream seed from the global seed and a
/// (experiment id, module name, trial index) key:
///   mix64(global ^ mix64(fnv1a(experiment) ^ rotl(fnv1a(module), 17)) + trial * golden)
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view experiment,
                          std::string_view module, std::uint64_t trial);

inline Rng make_stream(std::uint64_t global_seed, std::string_view experiment,
                       std::string_view module, std::uint64_t trial) {
  return Rng(derive_seed(global_seed, experiment, module, trial));
}

}  // namespace cogniscope
