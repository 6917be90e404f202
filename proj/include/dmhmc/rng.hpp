#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace dmhmc {

/// Named sub-streams of the single run seed. Every random draw in a run is
/// made from a fresh engine keyed on (seed, stream, agent, iteration), so
/// results are independent of evaluation order and thread count.
enum class RngStream : std::uint64_t {
  momentum = 1,
  uniform = 2,
  noise = 3,     // ULA injected noise
  data = 4,      // synthetic dataset generation
  init = 5,      // initial parameter draws
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 substream(std::uint64_t seed, RngStream stream,
                                 std::uint64_t agent, std::uint64_t iteration) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ agent);
  h = splitmix64(h ^ iteration);
  return std::mt19937_64(h);
}

inline Eigen::VectorXd standard_normal(std::mt19937_64& eng, Eigen::Index n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(eng);
  return v;
}

/// Uniform draw on the open interval (0,1); never returns an exact 0 or 1 so
/// log(u) stays finite.
inline double uniform_open(std::mt19937_64& eng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double u = dist(eng);
  while (u <= 0.0 || u >= 1.0) u = dist(eng);
  return u;
}

}  // namespace dmhmc
