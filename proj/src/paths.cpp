#include "jdoi/paths.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "jdoi/parallel.hpp"

namespace jdoi {

TimeGrid::TimeGrid(double maturity, int steps) : T(maturity), n_steps(steps) {
  if (!(maturity > 0.0)) throw ParameterError("time grid: T must be > 0");
  if (steps < 1) throw ParameterError("time grid: n_steps must be >= 1");
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> t(static_cast<std::size_t>(n_steps) + 1);
  for (int n = 0; n <= n_steps; ++n) t[static_cast<std::size_t>(n)] = time(n);
  return t;
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
                    0x6a646f69u};
  return std::mt19937_64(seq);
}

namespace {

// Uniform on [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

}  // namespace

PathBundle simulate(const H32JParams& p, const MarketState& x0, const TimeGrid& grid,
                    std::size_t n_paths, std::uint64_t seed, unsigned threads) {
  require_valid(p);
  if (n_paths < 1) throw ParameterError("simulate: n_paths must be >= 1");
  if (!(x0.s > 0.0)) throw DomainError("simulate: s0 must be > 0");
  if (x0.nu < 0.0 || x0.eta < 0.0) throw DomainError("simulate: nu0, eta0 must be >= 0");
  if (grid.n_steps < 1 || !(grid.T > 0.0)) throw ParameterError("simulate: invalid time grid");

  PathBundle b;
  b.grid = grid;
  b.n_paths = n_paths;
  b.seed = seed;
  const std::size_t total = n_paths * b.stride();
  b.s.resize(total);
  b.nu.resize(total);
  b.eta.resize(total);
  b.jump_count.assign(n_paths, 0);

  const double zeta = p.lambda > 0.0 ? jump_mean_zeta(p.jumps) : 0.0;
  const JumpSampler sampler(p.jumps);
  const double dt = grid.dt();
  const double sdt = std::sqrt(dt);
  const double rho1c = std::sqrt(1.0 - p.rho1 * p.rho1);
  const double rho2c = std::sqrt(1.0 - p.rho2 * p.rho2);
  const double drift0 = p.r - p.delta - p.lambda * zeta;
  const double c1sq = p.c1 * p.c1;
  const double c2sq = p.c2 * p.c2;
  const int N = grid.n_steps;

  parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t path = begin; path < end; ++path) {
      auto rng = path_rng(seed, path);
      std::normal_distribution<double> normal;
      std::poisson_distribution<int> poisson(p.lambda > 0.0 ? p.lambda * dt : 1.0);

      double logs = std::log(x0.s);
      double nu = x0.nu;  // latent values may dip below 0 under full truncation
      double eta = x0.eta;
      std::size_t i = b.at(path, 0);
      b.s[i] = x0.s;
      b.nu[i] = std::max(nu, 0.0);
      b.eta[i] = std::max(eta, 0.0);
      int jumps = 0;
      for (int n = 0; n < N; ++n) {
        const double z1 = normal(rng), z2 = normal(rng), z3 = normal(rng), z4 = normal(rng);
        const double nup = std::max(nu, 0.0);
        const double etap = std::max(eta, 0.0);
        const double w_nu = p.rho1 * z1 + rho1c * z3;
        const double w_eta = p.rho2 * z2 + rho2c * z4;
        const double snu = std::sqrt(nup);
        const double seta = std::sqrt(etap);

        logs += (drift0 - 0.5 * (c1sq * nup + c2sq * etap)) * dt +
                (p.c1 * snu * z1 + p.c2 * seta * z2) * sdt;
        nu += p.kappa1 * (p.theta1 - nup) * dt + p.sigma1 * snu * sdt * w_nu;
        eta += p.kappa2 * (p.theta2 - etap) * etap * dt + p.sigma2 * etap * seta * sdt * w_eta;

        if (p.lambda > 0.0) {
          const int k = poisson(rng);
          for (int j = 0; j < k; ++j) {
            JumpDraws u;
            u.branch = uniform01(rng);
            u.component = uniform01(rng);
            u.magnitude = uniform01(rng);
            logs += sampler(u);
          }
          jumps += k;
        }
        i = b.at(path, n + 1);
        b.s[i] = std::exp(logs);
        b.nu[i] = std::max(nu, 0.0);
        b.eta[i] = std::max(eta, 0.0);
      }
      b.jump_count[path] = jumps;
    }
  });
  return b;
}

void mark_knockout(PathBundle& b, double barrier) {
  if (!(barrier > 0.0)) throw ParameterError("mark_knockout: barrier must be > 0");
  b.knockout_idx.assign(b.n_paths, std::nullopt);
  for (std::size_t path = 0; path < b.n_paths; ++path) {
    for (int n = 0; n <= b.grid.n_steps; ++n) {
      if (b.s[b.at(path, n)] >= barrier) {
        b.knockout_idx[path] = n;
        break;
      }
    }
  }
}

void dump_paths(const PathBundle& b, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open path dump file " + file);
  out.precision(17);
  out << "path step t s nu eta dead\n";
  for (std::size_t path = 0; path < b.n_paths; ++path)
    for (int n = 0; n <= b.grid.n_steps; ++n) {
      const std::size_t i = b.at(path, n);
      out << path << ' ' << n << ' ' << b.grid.time(n) << ' ' << b.s[i] << ' ' << b.nu[i] << ' '
          << b.eta[i] << ' ' << (b.alive(path, n) ? 0 : 1) << '\n';
    }
}

}  // namespace jdoi
