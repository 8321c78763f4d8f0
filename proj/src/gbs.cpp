#include "jdoi/gbs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "jdoi/normal.hpp"

namespace jdoi {

namespace {

// Below this |c * vol * sqrt(xi)| the reflected downward blocks switch to
// their second-order expansion around the removable singularity c = 0.
constexpr double kSmallTilt = 1e-6;

struct VolContext {
  double tau;
  double sqrt_tau;
  double var;
  double sig;
  double v;  // sig * sqrt_tau
  double disc_r;
  double disc_d;
  VarianceTerms vt;
  double dsig_nu, dsig_eta, d2sig_nu, d2sig_eta;
};

// Black-Scholes put with the sigma-Greeks needed by the chain rule.
struct BsCore {
  double price, delta, vega, vomma, vanna;
};

VarianceTerms variance_terms(const H32JParams& p, double nu, double eta, double tau) {
  if (!(tau >= 0.0)) throw DomainError("deterministic variance: tau must be >= 0");
  if (nu < 0.0 || eta < 0.0) throw DomainError("deterministic variance: nu, eta must be >= 0");
  const double c1sq = p.c1 * p.c1;
  const double c2sq = p.c2 * p.c2;
  VarianceTerms t;
  if (tau < kTauEpsilon) {
    t.var = c1sq * nu + c2sq * eta;
    t.d_nu = c1sq;
    t.d_eta = c2sq;
    return t;
  }
  // (1 - exp(-x)) / x and log(eta/theta2 + (1 - eta/theta2) exp(-x)) in
  // cancellation-free form.
  const double x1 = p.kappa1 * tau;
  const double decay1 = -std::expm1(-x1) / x1;
  const double x2 = p.kappa2 * p.theta2 * tau;
  const double em2 = std::expm1(-x2);  // exp(-x2) - 1
  const double log_arg = 1.0 + (1.0 - eta / p.theta2) * em2;
  if (!(log_arg > 0.0))
    throw DomainError("deterministic variance: log argument " + std::to_string(log_arg) +
                      " <= 0");
  const double k2tau = p.kappa2 * tau;
  t.var = c1sq * p.theta1 + c2sq * p.theta2 + c1sq * (nu - p.theta1) * decay1 +
          c2sq / k2tau * std::log1p((1.0 - eta / p.theta2) * em2);
  t.d_nu = c1sq * decay1;
  const double ratio = -em2 / (eta + (p.theta2 - eta) * (1.0 + em2));
  t.d_eta = c2sq / k2tau * ratio;
  t.d2_nu = 0.0;
  t.d2_eta = -c2sq / k2tau * ratio * ratio;
  return t;
}

VolContext make_context(const H32JParams& p, double nu, double eta, double tau) {
  VolContext c{};
  c.tau = tau;
  c.sqrt_tau = std::sqrt(tau);
  c.vt = variance_terms(p, nu, eta, tau);
  c.var = c.vt.var;
  if (!(c.var > 0.0))
    throw DomainError("approximate market: sigma_bar^2 = " + std::to_string(c.var) +
                      " must be > 0");
  c.sig = std::sqrt(c.var);
  c.v = c.sig * c.sqrt_tau;
  c.disc_r = std::exp(-p.r * tau);
  c.disc_d = std::exp(-p.delta * tau);
  const double s3 = c.var * c.sig;
  c.dsig_nu = c.vt.d_nu / (2.0 * c.sig);
  c.dsig_eta = c.vt.d_eta / (2.0 * c.sig);
  c.d2sig_nu = -c.vt.d_nu * c.vt.d_nu / (4.0 * s3) + c.vt.d2_nu / (2.0 * c.sig);
  c.d2sig_eta = -c.vt.d_eta * c.vt.d_eta / (4.0 * s3) + c.vt.d2_eta / (2.0 * c.sig);
  return c;
}

void check_spot_strike(double s, double k) {
  if (!(s > 0.0)) throw DomainError("spot must be > 0, got " + std::to_string(s));
  if (!(k > 0.0)) throw DomainError("strike must be > 0, got " + std::to_string(k));
}

double remaining(double maturity, double t) {
  const double tau = maturity - t;
  if (tau < 0.0) throw DomainError("evaluation time beyond maturity");
  return tau;
}

BsCore bs_core(const VolContext& c, double carry, double s, double k) {
  const double d1 = (std::log(s / k) + (carry + 0.5 * c.var) * c.tau) / c.v;
  const double d2 = d1 - c.v;
  BsCore b;
  b.price = k * c.disc_r * norm_cdf(-d2) - s * c.disc_d * norm_cdf(-d1);
  b.delta = -c.disc_d * norm_cdf(-d1);
  b.vega = k * c.disc_r * norm_pdf(d2) * c.sqrt_tau;
  b.vomma = b.vega * d1 * d2 / c.sig;
  b.vanna = b.vega / s * (1.0 - d1 / c.v);
  return b;
}

GbsEval chain(const VolContext& c, const BsCore& b) {
  GbsEval e;
  e.price = b.price;
  e.dS = b.delta;
  e.dNu = b.vega * c.dsig_nu;
  e.dEta = b.vega * c.dsig_eta;
  e.d2Nu = b.vomma * c.dsig_nu * c.dsig_nu + b.vega * c.d2sig_nu;
  e.d2Eta = b.vomma * c.dsig_eta * c.dsig_eta + b.vega * c.d2sig_eta;
  e.dSdNu = b.vanna * c.dsig_nu;
  e.dSdEta = b.vanna * c.dsig_eta;
  e.sigma_bar = c.sig;
  e.tau = c.tau;
  return e;
}

GbsEval uop_eval(const VolContext& c, double carry, double s, double k, double h,
                 bool truncate = true) {
  if (truncate && s >= h) {
    GbsEval e;
    e.sigma_bar = c.sig;
    e.tau = c.tau;
    return e;
  }
  const GbsEval a = chain(c, bs_core(c, carry, s, k));
  const double hs = h * h / s;
  const GbsEval w = chain(c, bs_core(c, carry, hs, k));

  const double g = 2.0 * (carry / c.var - 0.5);  // 2 (gamma - 1)
  const double lg = std::log(h / s);
  const double m = std::exp(g * lg);
  const double hs2 = hs / s;

  // g depends on (nu, eta) through sigma_bar^2.
  const double var2 = c.var * c.var;
  const double var3 = var2 * c.var;
  const double dg_nu = -2.0 * carry / var2 * c.vt.d_nu;
  const double dg_eta = -2.0 * carry / var2 * c.vt.d_eta;
  const double d2g_nu = 4.0 * carry / var3 * c.vt.d_nu * c.vt.d_nu - 2.0 * carry / var2 * c.vt.d2_nu;
  const double d2g_eta =
      4.0 * carry / var3 * c.vt.d_eta * c.vt.d_eta - 2.0 * carry / var2 * c.vt.d2_eta;

  // Reflection term R = m * W(H^2/s) and its derivatives.
  const double rs_inner = -g / s * w.price - hs2 * w.dS;
  auto first = [&](double dg, double w1) { return m * (lg * dg * w.price + w1); };
  auto second = [&](double dg, double d2g, double w1, double w2) {
    return m * (lg * dg * lg * dg * w.price + lg * d2g * w.price + 2.0 * lg * dg * w1 + w2);
  };
  auto cross = [&](double dg, double w1, double ws1) {
    return m * lg * dg * rs_inner + m * (-dg / s * w.price - g / s * w1 - hs2 * ws1);
  };

  GbsEval e;
  e.price = a.price - m * w.price;
  e.dS = a.dS - m * rs_inner;
  e.dNu = a.dNu - first(dg_nu, w.dNu);
  e.dEta = a.dEta - first(dg_eta, w.dEta);
  e.d2Nu = a.d2Nu - second(dg_nu, d2g_nu, w.dNu, w.d2Nu);
  e.d2Eta = a.d2Eta - second(dg_eta, d2g_eta, w.dEta, w.d2Eta);
  e.dSdNu = a.dSdNu - cross(dg_nu, w.dNu, w.dSdNu);
  e.dSdEta = a.dSdEta - cross(dg_eta, w.dEta, w.dSdEta);
  e.sigma_bar = c.sig;
  e.tau = c.tau;
  return e;
}

GbsEval expiry_eval(double s, double k, double disc_d, double tau, bool knocked) {
  GbsEval e;
  e.tau = tau;
  if (knocked) return e;
  e.price = std::max(k - s, 0.0);
  e.dS = s < k ? -disc_d : 0.0;
  return e;
}

// exp(d c v + c^2 v^2 / 2) N(-d - c v)
double tilt_minus(double d, double c, double v) {
  const double cv = c * v;
  return exp_times_norm_cdf(d * cv + 0.5 * cv * cv, -d - cv);
}

// exp(-d c v + c^2 v^2 / 2) N(d - c v)
double tilt_plus(double d, double c, double v) {
  const double cv = c * v;
  return exp_times_norm_cdf(-d * cv + 0.5 * cv * cv, d - cv);
}

// (b / c) * (N(-d) - tilt_minus(d, c, v)), continuous through c = 0.
double reflected_down_block(double b, double c, double d, double nd, double v) {
  if (std::abs(c * v) < kSmallTilt) {
    const double pd = norm_pdf(d);
    const double g1 = v * (d * nd - pd);
    const double g2 = v * v * ((1.0 + d * d) * nd - d * pd);
    return -b * (g1 + 0.5 * g2 * c);
  }
  return b / c * (nd - tilt_minus(d, c, v));
}

struct DValues {
  double d1, d2, v;
};

DValues d_values(double chi, double vol, double xi, double carry) {
  if (!(chi > 0.0)) throw DomainError("jump integral: moneyness must be > 0");
  if (!(vol > 0.0) || !(xi > 0.0)) throw DomainError("jump integral: vol and xi must be > 0");
  const double v = vol * std::sqrt(xi);
  const double d1 = (std::log(chi) + (carry + 0.5 * vol * vol) * xi) / v;
  return {d1, d1 - v, v};
}

PsiPair psi_core(double chi, double vol, double xi, double carry, const MixedExpJump& j) {
  const auto [d1, d2, v] = d_values(chi, vol, xi, carry);
  const double n1 = norm_cdf(-d1);
  const double n2 = norm_cdf(-d2);
  double up1 = 0.0, up2 = 0.0, dn1 = 0.0, dn2 = 0.0;
  for (const auto& [w, a] : j.up) {
    up2 += w * (n2 - tilt_minus(d2, a, v));
    up1 += w * a / (a - 1.0) * (n1 - tilt_minus(d1, a - 1.0, v));
  }
  for (const auto& [w, b] : j.down) {
    dn2 += w * (n2 + tilt_plus(d2, b, v));
    dn1 += w * b / (b + 1.0) * (n1 + tilt_plus(d1, b + 1.0, v));
  }
  return {j.p_up * up1 + j.q_down() * dn1, j.p_up * up2 + j.q_down() * dn2};
}

void check_barrier_integrability(const MixedExpJump& j, double gamma, BarrierIntegrability mode) {
  for (std::size_t i = 0; i < j.up.size(); ++i) {
    const double a = j.up[i].rate;
    if (!(a + 2.0 * (gamma - 1.0) > 0.0))
      throw NumericalError("barrier jump-integral divergent: upward component " +
                           std::to_string(i + 1) + " (a = " + std::to_string(a) +
                           ") violates a_i + 2(gamma-1) > 0 at gamma = " +
                           std::to_string(gamma));
  }
  if (mode == BarrierIntegrability::Extended) return;
  for (std::size_t k = 0; k < j.down.size(); ++k) {
    const double b = j.down[k].rate;
    if (!(b - 2.0 * gamma + 1.0 > 0.0))
      throw NumericalError("barrier jump-integral divergent: downward component " +
                           std::to_string(k + 1) + " (b = " + std::to_string(b) +
                           ") violates b_j - 2 gamma + 1 > 0 at gamma = " +
                           std::to_string(gamma));
  }
}

PsiPair psi_barrier_core(double chi, double vol, double xi, double carry, double gamma,
                         const MixedExpJump& j, BarrierIntegrability mode) {
  check_barrier_integrability(j, gamma, mode);
  const auto [d1, d2, v] = d_values(chi, vol, xi, carry);
  const double n1 = norm_cdf(-d1);
  const double n2 = norm_cdf(-d2);
  const double g2 = 2.0 * (gamma - 1.0);
  double up1 = 0.0, up2 = 0.0, dn1 = 0.0, dn2 = 0.0;
  for (const auto& [w, a] : j.up) {
    const double c2 = a + g2;
    const double c1 = a + 2.0 * gamma - 1.0;
    up2 += w * a / c2 * (n2 + tilt_plus(d2, c2, v));
    up1 += w * a / c1 * (n1 + tilt_plus(d1, c1, v));
  }
  for (const auto& [w, b] : j.down) {
    dn2 += w * reflected_down_block(b, b - g2, d2, n2, v);
    dn1 += w * reflected_down_block(b, b - 2.0 * gamma + 1.0, d1, n1, v);
  }
  return {j.p_up * up1 + j.q_down() * dn1, j.p_up * up2 + j.q_down() * dn2};
}

// Integral of (K - s e^y) phi(y) over y < log(min(K, cap) / s): the jump
// integral of the payoff itself, used at expiry.
double intrinsic_jump_integral(const MixedExpJump& j, double s, double k, double cap) {
  const double ystar = std::log(std::min(k, cap) / s);
  double up = 0.0, down = 0.0;
  if (ystar >= 0.0) {
    for (const auto& [w, b] : j.down) down += w * (k - s * b / (b + 1.0));
    for (const auto& [w, a] : j.up)
      up += w * (k * -std::expm1(-a * ystar) - s * a / (a - 1.0) * -std::expm1(-(a - 1.0) * ystar));
  } else {
    for (const auto& [w, b] : j.down)
      down += w * (k * std::exp(b * ystar) - s * b / (b + 1.0) * std::exp((b + 1.0) * ystar));
  }
  return j.p_up * up + j.q_down() * down;
}

double put_jump_at(const H32JParams& p, const VolContext& c, double s, double k) {
  const PsiPair psi = psi_core(s / k, c.sig, c.tau, p.r - p.delta, p.jumps);
  return k * c.disc_r * psi.psi2 - s * c.disc_d * psi.psi1;
}

double uop_jump_at(const H32JParams& p, const VolContext& c, double s, double k, double h,
                   BarrierIntegrability mode) {
  if (s >= h) return 0.0;
  const double carry = p.r - p.delta;
  const double gamma = gamma_exponent(p.r, p.delta, c.var);
  const double plain = put_jump_at(p, c, s, k);
  const double hs = h * h / s;
  const PsiPair psi = psi_barrier_core(hs / k, c.sig, c.tau, carry, gamma, p.jumps, mode);
  const double reflected = k * c.disc_r * psi.psi2 - hs * c.disc_d * psi.psi1;
  return plain - std::exp(2.0 * (gamma - 1.0) * std::log(h / s)) * reflected;
}

}  // namespace

GbsModel::GbsModel(const H32JParams& params) : p_(params) {
  require_valid(p_);
  zeta_ = jump_mean_zeta(p_.jumps);
}

VarianceTerms GbsModel::variance(double nu, double eta, double tau) const {
  return variance_terms(p_, nu, eta, tau);
}

double GbsModel::put_price(const MarketState& x, double strike, double maturity) const {
  return put_greeks(x, strike, maturity).price;
}

GbsEval GbsModel::put_greeks(const MarketState& x, double strike, double maturity) const {
  check_spot_strike(x.s, strike);
  const double tau = remaining(maturity, x.t);
  if (tau < kTauEpsilon) return expiry_eval(x.s, strike, std::exp(-p_.delta * tau), tau, false);
  const VolContext c = make_context(p_, x.nu, x.eta, tau);
  return chain(c, bs_core(c, p_.r - p_.delta, x.s, strike));
}

double GbsModel::put_jump_integral(const MarketState& x, double strike, double maturity) const {
  check_spot_strike(x.s, strike);
  const double tau = remaining(maturity, x.t);
  if (tau < kTauEpsilon) return intrinsic_jump_integral(p_.jumps, x.s, strike, INFINITY);
  return put_jump_at(p_, make_context(p_, x.nu, x.eta, tau), x.s, strike);
}

double GbsModel::uop_price(const MarketState& x, double strike, double barrier,
                           double maturity) const {
  return uop_greeks(x, strike, barrier, maturity).price;
}

GbsEval GbsModel::uop_greeks(const MarketState& x, double strike, double barrier,
                             double maturity) const {
  check_spot_strike(x.s, strike);
  if (!(barrier > 0.0)) throw DomainError("barrier must be > 0");
  const double tau = remaining(maturity, x.t);
  if (tau < kTauEpsilon)
    return expiry_eval(x.s, strike, std::exp(-p_.delta * tau), tau, x.s >= barrier);
  const VolContext c = make_context(p_, x.nu, x.eta, tau);
  return uop_eval(c, p_.r - p_.delta, x.s, strike, barrier);
}

double GbsModel::uop_reflection(const MarketState& x, double strike, double barrier,
                                double maturity) const {
  check_spot_strike(x.s, strike);
  if (!(barrier > 0.0)) throw DomainError("barrier must be > 0");
  const double tau = remaining(maturity, x.t);
  if (tau < kTauEpsilon) {
    const double mirror = std::max(strike - barrier * barrier / x.s, 0.0);
    double v = std::max(strike - x.s, 0.0);
    if (mirror > 0.0) {
      const double var = p_.c1 * p_.c1 * x.nu + p_.c2 * p_.c2 * x.eta;
      if (!(var > 0.0)) throw DomainError("approximate market: sigma_bar^2 must be > 0");
      v -= std::pow(barrier / x.s, 2.0 * ((p_.r - p_.delta) / var - 0.5)) * mirror;
    }
    return v;
  }
  const VolContext c = make_context(p_, x.nu, x.eta, tau);
  return uop_eval(c, p_.r - p_.delta, x.s, strike, barrier, false).price;
}

double GbsModel::uop_jump_integral(const MarketState& x, double strike, double barrier,
                                   double maturity, BarrierIntegrability mode) const {
  check_spot_strike(x.s, strike);
  if (!(barrier > 0.0)) throw DomainError("barrier must be > 0");
  if (x.s >= barrier) return 0.0;
  const double tau = remaining(maturity, x.t);
  if (tau < kTauEpsilon) return intrinsic_jump_integral(p_.jumps, x.s, strike, barrier);
  return uop_jump_at(p_, make_context(p_, x.nu, x.eta, tau), x.s, strike, barrier, mode);
}

double GbsModel::price(const ContractSpec& c, const MarketState& x) const {
  return greeks(c, x).price;
}

GbsEval GbsModel::greeks(const ContractSpec& c, const MarketState& x) const {
  return c.is_barrier() ? uop_greeks(x, c.strike, c.barrier, c.maturity)
                        : put_greeks(x, c.strike, c.maturity);
}

double GbsModel::jump_integral(const ContractSpec& c, const MarketState& x,
                               BarrierIntegrability mode) const {
  return c.is_barrier() ? uop_jump_integral(x, c.strike, c.barrier, c.maturity, mode)
                        : put_jump_integral(x, c.strike, c.maturity);
}

double GbsModel::operator_difference(const ContractSpec& c, const MarketState& x,
                                     BarrierIntegrability mode) const {
  if (!x.alive) throw std::logic_error("generator evaluated on a knocked-out state");
  if (c.is_barrier() && x.s >= c.barrier) return 0.0;
  check_spot_strike(x.s, c.strike);
  const double tau = remaining(c.maturity, x.t);

  GbsEval e;
  double jump = 0.0;
  if (tau < kTauEpsilon) {
    e = greeks(c, x);
    jump = jump_integral(c, x, mode);
  } else {
    const VolContext ctx = make_context(p_, x.nu, x.eta, tau);
    const double carry = p_.r - p_.delta;
    if (c.is_barrier()) {
      e = uop_eval(ctx, carry, x.s, c.strike, c.barrier);
      jump = p_.lambda > 0.0 ? uop_jump_at(p_, ctx, x.s, c.strike, c.barrier, mode) : 0.0;
    } else {
      e = chain(ctx, bs_core(ctx, carry, x.s, c.strike));
      jump = p_.lambda > 0.0 ? put_jump_at(p_, ctx, x.s, c.strike) : 0.0;
    }
  }

  const double s = x.s;
  const double nu = x.nu;
  const double eta = x.eta;
  return -p_.lambda * zeta_ * s * e.dS + 0.5 * p_.sigma1 * p_.sigma1 * nu * e.d2Nu +
         p_.rho1 * s * p_.c1 * p_.sigma1 * nu * e.dSdNu +
         0.5 * p_.sigma2 * p_.sigma2 * eta * eta * eta * e.d2Eta +
         p_.rho2 * s * p_.c2 * p_.sigma2 * eta * eta * e.dSdEta + p_.lambda * (jump - e.price);
}

double deterministic_variance(const H32JParams& params, double nu0, double eta0, double tau) {
  return variance_terms(params, nu0, eta0, tau).var;
}

double put_price_gbs(const H32JParams& params, const MarketState& x, double strike,
                     double maturity) {
  return GbsModel(params).put_price(x, strike, maturity);
}

GbsEval put_greeks_gbs(const H32JParams& params, const MarketState& x, double strike,
                       double maturity) {
  return GbsModel(params).put_greeks(x, strike, maturity);
}

double put_jump_integral(const H32JParams& params, const MarketState& x, double strike,
                         double maturity) {
  return GbsModel(params).put_jump_integral(x, strike, maturity);
}

double uop_price_gbs(const H32JParams& params, const MarketState& x, double strike,
                     double barrier, double maturity) {
  return GbsModel(params).uop_price(x, strike, barrier, maturity);
}

GbsEval uop_greeks_gbs(const H32JParams& params, const MarketState& x, double strike,
                       double barrier, double maturity) {
  return GbsModel(params).uop_greeks(x, strike, barrier, maturity);
}

double uop_jump_integral(const H32JParams& params, const MarketState& x, double strike,
                         double barrier, double maturity, BarrierIntegrability mode) {
  return GbsModel(params).uop_jump_integral(x, strike, barrier, maturity, mode);
}

PsiPair psi_integrals(double chi, double vol, double xi, double carry, const MixedExpJump& jumps) {
  require_valid(jumps);
  return psi_core(chi, vol, xi, carry, jumps);
}

PsiPair psi_barrier(double chi, double vol, double xi, double carry, double gamma,
                    const MixedExpJump& jumps, BarrierIntegrability mode) {
  require_valid(jumps);
  return psi_barrier_core(chi, vol, xi, carry, gamma, jumps, mode);
}

double operator_difference(const ContractSpec& contract, const MarketState& x,
                           const H32JParams& params, BarrierIntegrability mode) {
  return GbsModel(params).operator_difference(contract, x, mode);
}

}  // namespace jdoi
