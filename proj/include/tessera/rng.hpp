#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tessera {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer; used to spread structured seeds over the state space.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream identified by a path such as
/// (experiment seed, setting index, replicate index). The result depends only
/// on the path, never on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept
{
  std::uint64_t h = mix64(seed);
  for (auto p : path)
    h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {})
{
  return Engine(derive_seed(seed, path));
}

} // namespace tessera
