#pragma once

#include "jdoi/model.hpp"

namespace jdoi {

/// Remaining maturities below this are treated as expiry: prices are
/// intrinsic and every Greek except Delta vanishes.
inline constexpr double kTauEpsilon = 1e-8;

/// European value under the approximate (GBS) market together with the
/// seven derivatives that enter the generator difference.
struct GbsEval {
  double price = 0.0;
  double dS = 0.0;
  double dNu = 0.0;
  double dEta = 0.0;
  double d2Nu = 0.0;
  double d2Eta = 0.0;
  double dSdNu = 0.0;
  double dSdEta = 0.0;
  double sigma_bar = 0.0;
  double tau = 0.0;
};

/// Spot-leg and strike-leg jump integrals.
struct PsiPair {
  double psi1 = 0.0;
  double psi2 = 0.0;
};

/// sigma_bar^2 over the remaining maturity and its (nu, eta) derivatives.
struct VarianceTerms {
  double var = 0.0;
  double d_nu = 0.0;
  double d_eta = 0.0;
  double d2_nu = 0.0;
  double d2_eta = 0.0;
};

/// How the reflected (barrier) jump integral treats its integrability
/// conditions a_i + 2(gamma-1) > 0 and b_j - 2 gamma + 1 > 0.
///
/// Strict rejects any violation. Extended only rejects a genuinely divergent
/// upward component: the downward integrals converge for every b_j because
/// the normal CDF factor vanishes faster than any exponential, so their
/// closed forms are evaluated as is (with the removable singularity at
/// b_j = 2 gamma - 1 handled by its limit).
enum class BarrierIntegrability { Strict, Extended };

/// Closed forms of the approximate market for one parameter set.
///
/// Construction validates the parameters once; every method is const and
/// safe to call concurrently.
class GbsModel {
 public:
  explicit GbsModel(const H32JParams& params);

  const H32JParams& params() const { return p_; }
  double zeta() const { return zeta_; }

  VarianceTerms variance(double nu, double eta, double tau) const;

  double put_price(const MarketState& x, double strike, double maturity) const;
  GbsEval put_greeks(const MarketState& x, double strike, double maturity) const;
  double put_jump_integral(const MarketState& x, double strike, double maturity) const;

  double uop_price(const MarketState& x, double strike, double barrier, double maturity) const;
  GbsEval uop_greeks(const MarketState& x, double strike, double barrier, double maturity) const;
  double uop_jump_integral(const MarketState& x, double strike, double barrier, double maturity,
                           BarrierIntegrability mode = BarrierIntegrability::Strict) const;
  /// The reflection formula without the cut at s >= H: equal to uop_price
  /// below the barrier, zero on it and negative just above. Needed where a
  /// discretely observed knockout has overshot the barrier.
  double uop_reflection(const MarketState& x, double strike, double barrier,
                        double maturity) const;

  /// European value of the contract's kind (style is ignored).
  double price(const ContractSpec& c, const MarketState& x) const;
  GbsEval greeks(const ContractSpec& c, const MarketState& x) const;
  double jump_integral(const ContractSpec& c, const MarketState& x,
                       BarrierIntegrability mode = BarrierIntegrability::Strict) const;

  /// (A_X - A_Xbar) V_E at x: the drift of the discounted approximate value
  /// under the true dynamics, net of its drift under the approximation.
  double operator_difference(const ContractSpec& c, const MarketState& x,
                             BarrierIntegrability mode = BarrierIntegrability::Strict) const;

 private:
  H32JParams p_;
  double zeta_;
};

double deterministic_variance(const H32JParams& params, double nu0, double eta0, double tau);

double put_price_gbs(const H32JParams& params, const MarketState& x, double strike,
                     double maturity);
GbsEval put_greeks_gbs(const H32JParams& params, const MarketState& x, double strike,
                       double maturity);
double put_jump_integral(const H32JParams& params, const MarketState& x, double strike,
                         double maturity);

double uop_price_gbs(const H32JParams& params, const MarketState& x, double strike,
                     double barrier, double maturity);
GbsEval uop_greeks_gbs(const H32JParams& params, const MarketState& x, double strike,
                       double barrier, double maturity);
double uop_jump_integral(const H32JParams& params, const MarketState& x, double strike,
                         double barrier, double maturity,
                         BarrierIntegrability mode = BarrierIntegrability::Strict);

/// Psi_1 (spot leg) and Psi_2 (strike leg) of the plain jump integral at
/// moneyness chi, volatility vol, maturity xi and carry r - delta.
PsiPair psi_integrals(double chi, double vol, double xi, double carry, const MixedExpJump& jumps);

/// Reflected-leg counterparts Psi_B,1 and Psi_B,2 with the extra
/// exp(-2(gamma-1) y) weight.
PsiPair psi_barrier(double chi, double vol, double xi, double carry, double gamma,
                    const MixedExpJump& jumps,
                    BarrierIntegrability mode = BarrierIntegrability::Strict);

double operator_difference(const ContractSpec& contract, const MarketState& x,
                           const H32JParams& params,
                           BarrierIntegrability mode = BarrierIntegrability::Strict);

}  // namespace jdoi
