#include "jdoi/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jdoi/parallel.hpp"

namespace jdoi {

EstimatorStats aggregate(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("aggregate: insufficient data (need n >= 2)");
  EstimatorStats st;
  st.n = xs.size();
  const double n = static_cast<double>(st.n);
  double sum = 0.0;
  st.min = st.max = xs.front();
  for (double x : xs) {
    sum += x;
    st.min = std::min(st.min, x);
    st.max = std::max(st.max, x);
  }
  st.mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - st.mean) * (x - st.mean);
  st.sample_std = std::sqrt(ss / (n - 1.0));
  const double half = 1.96 * st.sample_std / std::sqrt(n);
  st.ci95_lo = st.mean - half;
  st.ci95_hi = st.mean + half;
  // Rounding in the mean can put it a hair outside [min, max] for constant data.
  st.mean = std::clamp(st.mean, st.min, st.max);
  return st;
}

double mc_sample(const PathBundle& b, std::size_t path, const StoppingPolicy& pol,
                 const ContractSpec& c, double r) {
  const int tau = pol.exercise_idx[path];
  if (!b.alive(path, tau)) return 0.0;
  return std::exp(-r * b.grid.time(tau)) * c.payoff(b.s[b.at(path, tau)], true);
}

SamplePair jdoi_sample(const PathBundle& b, std::size_t path, const StoppingPolicy& pol,
                       const ContractSpec& c, const GbsModel& model, double v0) {
  const double r = model.params().r;
  const double dt = b.grid.dt();
  const int tau = pol.exercise_idx[path];
  SamplePair out;
  out.path_id = path;
  out.mc = mc_sample(b, path, pol, c, r);

  // Left-endpoint Riemann sum; every state strictly before tau is alive.
  double integral = 0.0;
  for (int n = 0; n < tau; ++n) {
    const MarketState x = b.state(path, n);
    integral += std::exp(-r * x.t) *
                model.operator_difference(c, x, BarrierIntegrability::Extended);
  }
  const MarketState x = b.state(path, tau);
  double terminal = 0.0;
  if (x.alive) {
    terminal = std::exp(-r * x.t) * (c.payoff(x.s, true) - model.price(c, x));
  } else if (c.is_barrier()) {
    // Knockout seen on the grid: the spot has overshot H, where the smooth
    // approximate value is not zero. Option value there is 0.
    terminal = -std::exp(-r * x.t) * model.uop_reflection(x, c.strike, c.barrier, c.maturity);
  }
  out.jdoi = v0 + terminal + integral * dt;
  return out;
}

namespace {

void check_setup(const ContractSpec& c, const MarketState& x0, const TimeGrid& grid) {
  c.check();
  if (x0.t != 0.0) throw ParameterError("estimator: initial state must be at t = 0");
  if (std::abs(grid.T - c.maturity) > 1e-12 * c.maturity)
    throw ParameterError("estimator: grid horizon differs from contract maturity");
}

void finish(EstimatorRun& run) {
  std::vector<double> xs(run.samples.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = run.samples[i].mc;
  run.mc = aggregate(xs);
  if (run.has_jdoi) {
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = run.samples[i].jdoi;
    run.jdoi = aggregate(xs);
  }
}

}  // namespace

EstimatorRun evaluate_policy(const PathBundle& b, const StoppingPolicy& pol,
                             const H32JParams& params, const ContractSpec& c,
                             const MarketState& x0, const EstimatorOptions& opts) {
  EstimatorRun run;
  run.samples.resize(b.n_paths);
  run.has_jdoi = opts.jdoi;
  run.warnings = pol.warnings;
  if (opts.jdoi) {
    const GbsModel model(params);
    // Dead at inception: the reflection value cancels against the
    // knockout term, so every sample is exactly 0.
    const bool dead0 = c.is_barrier() && x0.s >= c.barrier;
    const double v0 = dead0 ? model.uop_reflection(x0, c.strike, c.barrier, c.maturity)
                            : model.price(c, x0);
    parallel_for(b.n_paths, opts.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t p = begin; p < end; ++p) run.samples[p] = jdoi_sample(b, p, pol, c, model, v0);
    });
  } else {
    for (std::size_t p = 0; p < b.n_paths; ++p)
      run.samples[p] = {mc_sample(b, p, pol, c, params.r), 0.0, p};
  }
  finish(run);
  return run;
}

EstimatorRun european_jdoi(const H32JParams& params, const ContractSpec& contract,
                           const MarketState& x0, const TimeGrid& grid, std::size_t n_paths,
                           std::uint64_t seed, const EstimatorOptions& opts) {
  check_setup(contract, x0, grid);
  if (contract.is_american()) throw ParameterError("european_jdoi: contract is American");
  PathBundle b = simulate(params, x0, grid, n_paths, seed, opts.threads);
  if (contract.is_barrier()) mark_knockout(b, contract.barrier);
  return evaluate_policy(b, european_policy(b, contract), params, contract, x0, opts);
}

EstimatorRun american_jdoi(const H32JParams& params, const ContractSpec& contract,
                           const MarketState& x0, const TimeGrid& grid, std::size_t n_paths,
                           std::uint64_t seed, const EstimatorOptions& opts) {
  check_setup(contract, x0, grid);
  if (!contract.is_american()) throw ParameterError("american_jdoi: contract is European");
  PathBundle b = simulate(params, x0, grid, n_paths, seed, opts.threads);
  if (contract.is_barrier()) mark_knockout(b, contract.barrier);
  StoppingPolicy pol = backward_induct(b, contract, params, opts.basis);
  if (!opts.out_of_sample) return evaluate_policy(b, pol, params, contract, x0, opts);

  // Independent pricing bundle: the seed is moved off the run-seed lattice.
  PathBundle fresh =
      simulate(params, x0, grid, n_paths, seed ^ 0x9E3779B97F4A7C15ULL, opts.threads);
  if (contract.is_barrier()) mark_knockout(fresh, contract.barrier);
  StoppingPolicy applied = apply_policy(fresh, contract, pol, opts.basis);
  applied.warnings = pol.warnings;
  return evaluate_policy(fresh, applied, params, contract, x0, opts);
}

}  // namespace jdoi
