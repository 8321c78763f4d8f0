#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jdoi/model.hpp"

namespace jdoi {

struct TimeGrid {
  double T = 0.5;
  int n_steps = 100;

  TimeGrid() = default;
  TimeGrid(double maturity, int steps);

  double dt() const { return T / n_steps; }
  // Exact at both ends: time(0) == 0, time(n_steps) == T.
  double time(int n) const { return n == n_steps ? T : T * n / n_steps; }
  std::vector<double> times() const;
};

// Simulated states on the grid, stored path-major: value(p, n) lives at
// p * (n_steps + 1) + n.
struct PathBundle {
  TimeGrid grid;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<double> s, nu, eta;
  // Number of jumps over [0, T] per path.
  std::vector<int> jump_count;
  // Filled by mark_knockout only: first grid index with s >= H.
  std::vector<std::optional<int>> knockout_idx;

  std::size_t stride() const { return static_cast<std::size_t>(grid.n_steps) + 1; }
  std::size_t at(std::size_t p, int n) const { return p * stride() + static_cast<std::size_t>(n); }
  bool barrier_marked() const { return !knockout_idx.empty(); }
  bool alive(std::size_t p, int n) const {
    return !barrier_marked() || !knockout_idx[p] || n < *knockout_idx[p];
  }
  MarketState state(std::size_t p, int n) const {
    const std::size_t i = at(p, n);
    return {grid.time(n), s[i], nu[i], eta[i], alive(p, n)};
  }
};

// Independent generator for one path, a pure function of (seed, path).
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path);

PathBundle simulate(const H32JParams& params, const MarketState& x0, const TimeGrid& grid,
                    std::size_t n_paths, std::uint64_t seed, unsigned threads = 1);

// Discrete monitoring at grid points only.
void mark_knockout(PathBundle& bundle, double barrier);

// Columnar text dump: path step t s nu eta dead.
void dump_paths(const PathBundle& bundle, const std::string& file);

}  // namespace jdoi
