#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace depthlab
{

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
	z += 0x9e3779b97f4a7c15ULL;
	z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
	z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
	return z ^ (z >> 31);
}

/// Counter-based stream seed: depends only on the master seed and the listed counters.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> counters)
{
	std::uint64_t h = mix64(master);
	for (auto c : counters)
		h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
	return h;
}

inline Rng make_rng(std::uint64_t seed)
{
	std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
	return Rng(seq);
}

}  // namespace depthlab
