#include "oracles.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <vector>

namespace oracle {

namespace {

const boost::math::normal_distribution<double> kStd;

double tail_cut(const std::vector<jdoi::ExpComponent>& cs, double mass, double abs_tol) {
  double y = 0.0;
  for (const auto& c : cs) {
    const double scale = std::abs(mass * c.weight) * 10.0 / abs_tol;
    if (scale > 1.0) y = std::max(y, std::log(scale) / c.rate);
  }
  // Headroom for integrands that grow like exp(|y|) or exp(2(gamma-1)|y|).
  return 2.0 * y + 0.05;
}

}  // namespace

double normal_cdf(double x) {
  if (x < -38.0) return 0.0;
  if (x > 38.0) return 1.0;
  return boost::math::cdf(kStd, x);
}

double normal_pdf(double x) { return boost::math::pdf(kStd, x); }

double quad(const std::function<double(double)>& f, double a, double b, const QuadratureSpec& spec) {
  double err = 0.0, l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, spec.max_subdivisions, spec.rel_tol, &err, &l1);
  if (!std::isfinite(v) || err > std::max(spec.abs_tol, 10.0 * spec.rel_tol * l1))
    throw OracleFailure("quadrature did not converge on [" + std::to_string(a) + ", " +
                        std::to_string(b) + "], error estimate " + std::to_string(err) + ", value " + std::to_string(v));
  return v;
}

double quad_mixture(const std::function<double(double)>& g, const jdoi::MixedExpJump& j,
                    const QuadratureSpec& spec, const std::vector<double>& breaks) {
  auto pieces = [&](double a, double b, const std::function<double(double)>& f) {
    std::vector<double> pts{a};
    for (double x : breaks)
      if (x > a && x < b) pts.push_back(x);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) acc += quad(f, pts[i], pts[i + 1], spec);
    return acc;
  };
  double total = 0.0;
  const double pu = j.p_up, qd = 1.0 - j.p_up;
  if (pu != 0.0 && !j.up.empty()) {
    const double hi = tail_cut(j.up, pu, spec.abs_tol);
    total += pieces(0.0, hi, [&](double y) {
      double dens = 0.0;
      for (const auto& c : j.up) dens += c.weight * c.rate * std::exp(-c.rate * y);
      return pu * dens * g(y);
    });
  }
  if (qd != 0.0 && !j.down.empty()) {
    const double lo = -tail_cut(j.down, qd, spec.abs_tol);
    total += pieces(lo, 0.0, [&](double y) {
      double dens = 0.0;
      for (const auto& c : j.down) dens += c.weight * c.rate * std::exp(c.rate * y);
      return qd * dens * g(y);
    });
  }
  return total;
}

double quad_jump_integral(const std::function<double(double)>& valuation, double s,
                          const jdoi::MixedExpJump& jumps, const QuadratureSpec& spec) {
  return quad_mixture([&](double y) { return valuation(s * std::exp(y)); }, jumps, spec);
}

PsiQuad psi_quadrature(double chi, double vol, double xi, double carry,
                       const jdoi::MixedExpJump& j) {
  const double sd = vol * std::sqrt(xi);
  auto d1 = [&](double m) { return (std::log(m) + (carry + 0.5 * vol * vol) * xi) / sd; };
  PsiQuad q;
  q.psi2 = quad_mixture([&](double y) { return normal_cdf(-(d1(chi * std::exp(y)) - sd)); }, j);
  q.psi1 = quad_mixture([&](double y) { return std::exp(y) * normal_cdf(-d1(chi * std::exp(y))); }, j);
  return q;
}

PsiQuad psi_barrier_quadrature(double chi, double vol, double xi, double carry, double gamma,
                               const jdoi::MixedExpJump& j) {
  const double sd = vol * std::sqrt(xi);
  const double g = 2.0 * (gamma - 1.0);
  auto d1 = [&](double m) { return (std::log(m) + (carry + 0.5 * vol * vol) * xi) / sd; };
  PsiQuad q;
  q.psi2 = quad_mixture(
      [&](double y) { return std::exp(-g * y) * normal_cdf(-(d1(chi * std::exp(-y)) - sd)); }, j);
  q.psi1 = quad_mixture(
      [&](double y) { return std::exp(-(g + 1.0) * y) * normal_cdf(-d1(chi * std::exp(-y))); }, j);
  return q;
}

double average_variance(const jdoi::H32JParams& p, double nu, double eta, double tau) {
  if (tau <= 0.0) return p.c1 * p.c1 * nu + p.c2 * p.c2 * eta;
  // nu trend: linear mean reversion; eta trend: logistic equation.
  auto trend = [&](double u) {
    const double nbar = nu * std::exp(-p.kappa1 * u) - p.theta1 * std::expm1(-p.kappa1 * u);
    const double ebar = p.theta2 * eta / (eta + (p.theta2 - eta) * std::exp(-p.kappa2 * p.theta2 * u));
    return p.c1 * p.c1 * nbar + p.c2 * p.c2 * ebar;
  };
  QuadratureSpec spec;
  spec.abs_tol = 1e-14;
  spec.rel_tol = 1e-13;
  return quad([&](double x) { return trend(tau * x); }, 0.0, 1.0, spec);
}

double bs_put(double s, double k, double vol, double tau, double r, double delta) {
  const double sd = vol * std::sqrt(tau);
  const double d1 = (std::log(s / k) + (r - delta + 0.5 * vol * vol) * tau) / sd;
  const double d2 = d1 - sd;
  return k * std::exp(-r * tau) * normal_cdf(-d2) - s * std::exp(-delta * tau) * normal_cdf(-d1);
}

double gbs_put(const jdoi::H32JParams& p, double s, double nu, double eta, double k, double tau) {
  const double vol = std::sqrt(average_variance(p, nu, eta, tau));
  return bs_put(s, k, vol, tau, p.r, p.delta);
}

double gbs_uop_reflection(const jdoi::H32JParams& p, double s, double nu, double eta, double k,
                          double h, double tau) {
  const double var = average_variance(p, nu, eta, tau);
  const double vol = std::sqrt(var);
  const double gm1 = (p.r - p.delta) / var - 0.5;
  return bs_put(s, k, vol, tau, p.r, p.delta) -
         std::pow(h / s, 2.0 * gm1) * bs_put(h * h / s, k, vol, tau, p.r, p.delta);
}

FdGreeks fd_greeks(const std::function<double(double, double, double)>& v, double s, double nu,
                   double eta, const FdBumps& b) {
  auto step = [](double x, double rel, double floor) { return std::max(rel * std::abs(x), floor); };
  auto rich = [](double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; };

  auto d1 = [&](int axis, double h) {
    double up[3] = {s, nu, eta}, dn[3] = {s, nu, eta};
    up[axis] += h;
    dn[axis] -= h;
    return (v(up[0], up[1], up[2]) - v(dn[0], dn[1], dn[2])) / (2.0 * h);
  };
  auto d2 = [&](int axis, double h) {
    double up[3] = {s, nu, eta}, dn[3] = {s, nu, eta};
    up[axis] += h;
    dn[axis] -= h;
    return (v(up[0], up[1], up[2]) - 2.0 * v(s, nu, eta) + v(dn[0], dn[1], dn[2])) / (h * h);
  };
  auto cross = [&](int axis, double hs, double hx) {
    auto at = [&](double ds, double dx) {
      double x[3] = {s + ds, nu, eta};
      x[axis] += dx;
      return v(x[0], x[1], x[2]);
    };
    return (at(hs, hx) - at(hs, -hx) - at(-hs, hx) + at(-hs, -hx)) / (4.0 * hs * hx);
  };

  const double hs1 = step(s, b.rel_first, b.floor_s);
  const double hn1 = step(nu, b.rel_first, b.floor_var);
  const double he1 = step(eta, b.rel_first, b.floor_var);
  const double hs2 = step(s, b.rel_second, b.floor_s);
  const double hn2 = step(nu, b.rel_second, b.floor_var);
  const double he2 = step(eta, b.rel_second, b.floor_var);

  FdGreeks g;
  g.dS = rich(d1(0, hs1), d1(0, hs1 / 2));
  g.dNu = rich(d1(1, hn1), d1(1, hn1 / 2));
  g.dEta = rich(d1(2, he1), d1(2, he1 / 2));
  g.d2Nu = rich(d2(1, hn2), d2(1, hn2 / 2));
  g.d2Eta = rich(d2(2, he2), d2(2, he2 / 2));
  g.dSdNu = rich(cross(1, hs2, hn2), cross(1, hs2 / 2, hn2 / 2));
  g.dSdEta = rich(cross(2, hs2, he2), cross(2, hs2 / 2, he2 / 2));
  return g;
}

double enumerate_toy_policy(const jdoi::PathBundle& b, const jdoi::ContractSpec& c, double r) {
  const int N = b.grid.n_steps;
  if (b.n_paths * static_cast<std::size_t>(N) > 12)
    throw OracleFailure("toy enumeration refused: n_paths * n_steps exceeds 12");

  // Decision nodes: (step, distinct state history up to that step).
  std::map<std::pair<int, std::vector<double>>, int> node_id;
  std::vector<std::vector<int>> node_of(b.n_paths, std::vector<int>(static_cast<std::size_t>(N), -1));
  for (std::size_t p = 0; p < b.n_paths; ++p) {
    std::vector<double> hist;
    for (int n = 0; n < N; ++n) {
      const std::size_t i = b.at(p, n);
      hist.insert(hist.end(), {b.s[i], b.nu[i], b.eta[i], b.alive(p, n) ? 1.0 : 0.0});
      auto key = std::make_pair(n, hist);
      auto it = node_id.find(key);
      if (it == node_id.end()) it = node_id.emplace(key, static_cast<int>(node_id.size())).first;
      node_of[p][static_cast<std::size_t>(n)] = it->second;
    }
  }
  const std::size_t nodes = node_id.size();
  double best = -INFINITY;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nodes); ++mask) {
    double total = 0.0;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
      int stop = N;
      for (int n = 0; n < N; ++n) {
        if (!b.alive(p, n) || (mask >> node_of[p][static_cast<std::size_t>(n)] & 1u)) {
          stop = n;
          break;
        }
      }
      total += std::exp(-r * b.grid.time(stop)) * c.payoff(b.s[b.at(p, stop)], b.alive(p, stop));
    }
    best = std::max(best, total / static_cast<double>(b.n_paths));
  }
  return best;
}

}  // namespace oracle
