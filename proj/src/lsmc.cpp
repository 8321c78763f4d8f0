#include "jdoi/lsmc.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace jdoi {

std::size_t BasisSpec::columns() const {
  return static_cast<std::size_t>(spot_order + 1) + (include_nu ? 1 : 0) + (include_eta ? 1 : 0) +
         (cross_terms ? (include_nu ? 1 : 0) + (include_eta ? 1 : 0) : 0);
}

double laguerre(double x, int k) {
  if (k < 0) throw std::invalid_argument("laguerre: order must be >= 0");
  double l0 = 1.0;
  if (k == 0) return l0;
  double l1 = 1.0 - x;
  for (int n = 1; n < k; ++n) {
    const double l2 = ((2.0 * n + 1.0 - x) * l1 - n * l0) / (n + 1.0);
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

namespace {

void fill_row(const MarketState& x, const BasisSpec& spec, double strike, double* out) {
  const double m = x.s / strike;
  std::size_t c = 0;
  double l0 = 1.0, l1 = 1.0 - m;
  for (int k = 0; k <= spec.spot_order; ++k) {
    if (k == 0) {
      out[c++] = l0;
    } else if (k == 1) {
      out[c++] = l1;
    } else {
      const double n = k - 1;
      const double l2 = ((2.0 * n + 1.0 - m) * l1 - n * l0) / (n + 1.0);
      l0 = l1;
      l1 = l2;
      out[c++] = l2;
    }
  }
  if (spec.include_nu) out[c++] = x.nu;
  if (spec.include_eta) out[c++] = x.eta;
  if (spec.cross_terms) {
    if (spec.include_nu) out[c++] = x.nu * m;
    if (spec.include_eta) out[c++] = x.eta * m;
  }
}

// Least squares on equilibrated columns; a relative ridge only when the
// scaled design is rank deficient.
Eigen::VectorXd fit(Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  const Eigen::Index k = a.cols();
  Eigen::VectorXd scale(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double nrm = a.col(j).norm();
    scale(j) = nrm > 0.0 ? 1.0 / nrm : 1.0;
    a.col(j) *= scale(j);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::VectorXd beta;
  if (qr.rank() == k) {
    beta = qr.solve(y);
  } else {
    Eigen::MatrixXd m = a.transpose() * a;
    const double ridge = 1e-10 * m.trace() / static_cast<double>(k);
    m.diagonal().array() += ridge;
    beta = m.ldlt().solve(a.transpose() * y);
  }
  return beta.cwiseProduct(scale);
}

}  // namespace

std::vector<double> design_row(const MarketState& state, const BasisSpec& spec, double strike) {
  if (spec.spot_order < 0) throw ParameterError("basis: spot_order must be >= 0");
  std::vector<double> row(spec.columns());
  fill_row(state, spec, strike, row.data());
  return row;
}

StoppingPolicy european_policy(const PathBundle& b, const ContractSpec& c) {
  const int N = b.grid.n_steps;
  StoppingPolicy pol;
  pol.n_steps = N;
  pol.exercise_idx.assign(b.n_paths, N);
  pol.cashflow.assign(b.n_paths, 0.0);
  for (std::size_t p = 0; p < b.n_paths; ++p) {
    if (b.barrier_marked() && b.knockout_idx[p]) {
      pol.exercise_idx[p] = *b.knockout_idx[p];
      continue;
    }
    pol.cashflow[p] = c.payoff(b.s[b.at(p, N)], true);
  }
  return pol;
}

StoppingPolicy backward_induct(const PathBundle& b, const ContractSpec& c, const H32JParams& params,
                               const BasisSpec& spec) {
  if (spec.spot_order < 0) throw ParameterError("basis: spot_order must be >= 0");
  if (c.is_barrier() && !b.barrier_marked())
    throw std::logic_error("backward_induct: barrier contract needs knockout marks");

  // Start from holding to maturity; knocked-out paths keep zero cashflow.
  StoppingPolicy pol = european_policy(b, c);
  const int N = b.grid.n_steps;
  const double r = params.r;
  const std::size_t k = spec.columns();

  pol.coefficients.assign(static_cast<std::size_t>(N) + 1, {});
  std::vector<std::size_t> itm;
  itm.reserve(b.n_paths);
  for (int n = N - 1; n >= 1; --n) {
    const double tn = b.grid.time(n);
    itm.clear();
    for (std::size_t p = 0; p < b.n_paths; ++p) {
      if (!b.alive(p, n)) continue;
      if (c.payoff(b.s[b.at(p, n)], true) > 0.0) itm.push_back(p);
    }
    if (itm.empty()) continue;
    if (itm.size() < k) {
      pol.warnings.push_back("step " + std::to_string(n) + ": " + std::to_string(itm.size()) +
                             " in-the-money paths for " + std::to_string(k) +
                             " regressors, no exercise");
      continue;
    }
    Eigen::MatrixXd a(static_cast<Eigen::Index>(itm.size()), static_cast<Eigen::Index>(k));
    Eigen::VectorXd y(static_cast<Eigen::Index>(itm.size()));
    std::vector<double> row(k);
    for (std::size_t i = 0; i < itm.size(); ++i) {
      const std::size_t p = itm[i];
      fill_row(b.state(p, n), spec, c.strike, row.data());
      for (std::size_t j = 0; j < k; ++j)
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
      const double tex = b.grid.time(pol.exercise_idx[p]);
      y(static_cast<Eigen::Index>(i)) = pol.cashflow[p] * std::exp(-r * (tex - tn));
    }
    Eigen::MatrixXd design = a;
    const Eigen::VectorXd beta = fit(a, y);
    auto& coef = pol.coefficients[static_cast<std::size_t>(n)];
    coef.assign(beta.data(), beta.data() + beta.size());
    for (std::size_t i = 0; i < itm.size(); ++i) {
      const std::size_t p = itm[i];
      const double g = c.payoff(b.s[b.at(p, n)], true);
      double cont = 0.0;
      for (std::size_t j = 0; j < k; ++j)
        cont += design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * coef[j];
      if (g >= cont) {
        pol.exercise_idx[p] = n;
        pol.cashflow[p] = g;
      }
    }
  }

  // t_0: one common state, so compare with the mean discounted cashflow.
  const bool alive0 = !c.is_barrier() || b.s[b.at(0, 0)] < c.barrier;
  if (alive0) {
    const double g0 = c.payoff(b.s[b.at(0, 0)], true);
    if (g0 > 0.0 && g0 >= policy_value(b, pol, r)) {
      pol.exercise_idx.assign(b.n_paths, 0);
      pol.cashflow.assign(b.n_paths, g0);
      pol.exercise_at_t0 = true;
    }
  }
  return pol;
}

StoppingPolicy apply_policy(const PathBundle& b, const ContractSpec& c, const StoppingPolicy& rule,
                            const BasisSpec& spec) {
  const int N = b.grid.n_steps;
  if (rule.n_steps != N || rule.coefficients.size() != static_cast<std::size_t>(N) + 1)
    throw std::invalid_argument("apply_policy: rule was fitted on a different grid");
  if (c.is_barrier() && !b.barrier_marked())
    throw std::logic_error("apply_policy: barrier contract needs knockout marks");
  StoppingPolicy pol;
  pol.n_steps = N;
  pol.exercise_idx.assign(b.n_paths, N);
  pol.cashflow.assign(b.n_paths, 0.0);
  pol.coefficients = rule.coefficients;
  pol.exercise_at_t0 = rule.exercise_at_t0;
  std::vector<double> row(spec.columns());
  for (std::size_t p = 0; p < b.n_paths; ++p) {
    for (int n = 0; n <= N; ++n) {
      if (!b.alive(p, n)) {
        pol.exercise_idx[p] = n;
        break;
      }
      const double g = c.payoff(b.s[b.at(p, n)], true);
      bool stop = n == N || (n == 0 && rule.exercise_at_t0);
      const auto& beta = rule.coefficients[static_cast<std::size_t>(n)];
      if (!stop && n > 0 && g > 0.0 && !beta.empty()) {
        fill_row(b.state(p, n), spec, c.strike, row.data());
        double cont = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) cont += row[j] * beta[j];
        stop = g >= cont;
      }
      if (stop) {
        pol.exercise_idx[p] = n;
        pol.cashflow[p] = g;
        break;
      }
    }
  }
  return pol;
}

double policy_value(const PathBundle& b, const StoppingPolicy& pol, double r) {
  double acc = 0.0;
  for (std::size_t p = 0; p < b.n_paths; ++p)
    acc += pol.cashflow[p] * std::exp(-r * b.grid.time(pol.exercise_idx[p]));
  return acc / static_cast<double>(b.n_paths);
}

}  // namespace jdoi
