#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace jdoi {

/// Invalid or inconsistent model/contract parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a formula (log of a
/// nonpositive number, zero volatility, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A computation that cannot produce a finite result for valid inputs.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One exponential component of a mixture branch: weight and rate.
struct ExpComponent {
  double weight;
  double rate;
};

/// Mixed-exponential law of the log-jump size Y.
///
/// Density: p_up * sum_i p_i a_i exp(-a_i y) on y >= 0 plus
/// q_down * sum_j q_j b_j exp(b_j y) on y < 0. Weights inside a branch sum to
/// one and may be negative as long as the density stays nonnegative.
struct MixedExpJump {
  double p_up = 0.5;
  std::vector<ExpComponent> up;    // (p_i, a_i)
  std::vector<ExpComponent> down;  // (q_j, b_j)

  double q_down() const { return 1.0 - p_up; }

  /// m = n = 1 special case: P(up) = p, up rate a, down rate b.
  static MixedExpJump double_exponential(double p, double a, double b);
};

/// Parameters of the Heston + 3/2 + jumps market.
struct H32JParams {
  double r = 0.04;
  double delta = 0.0;
  double lambda = 5.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double kappa1 = 0.6;
  double theta1 = 0.01;
  double sigma1 = 0.1;
  double rho1 = -0.15;
  double kappa2 = 60.0;
  double theta2 = 0.01;
  double sigma2 = 10.0;
  double rho2 = 0.15;
  MixedExpJump jumps = MixedExpJump::double_exponential(0.3, 100.0, 25.0);

  /// Reference parameter set used throughout the benchmarks.
  static H32JParams table1();
};

/// Point of the state space (t, S, nu, eta) plus the knockout flag.
struct MarketState {
  double t = 0.0;
  double s = 100.0;
  double nu = 0.01;
  double eta = 0.01;
  bool alive = true;
};

enum class ContractKind { VanillaPut, UpAndOutPut };
enum class ExerciseStyle { European, American };

struct ContractSpec {
  ContractKind kind = ContractKind::VanillaPut;
  ExerciseStyle style = ExerciseStyle::European;
  double strike = 100.0;
  double barrier = 0.0;  // only read for UpAndOutPut
  double maturity = 0.5;

  bool is_barrier() const { return kind == ContractKind::UpAndOutPut; }
  bool is_american() const { return style == ExerciseStyle::American; }

  /// Immediate exercise value; zero on knocked-out states.
  double payoff(double s, bool alive = true) const;

  /// Throws ParameterError on K <= 0, T <= 0 or a missing barrier.
  void check() const;
};

enum class Severity { Error, Warning };

struct ValidationIssue {
  std::string name;
  Severity severity;
  std::string detail;
};

/// Every violated invariant of a parameter set, by name. Empty means all
/// constraints hold, including the mixture's sufficient nonnegativity
/// condition (which is only ever reported as a warning).
struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool empty() const { return issues.empty(); }
  bool has_errors() const;
  bool contains(const std::string& name) const;
  std::string to_string() const;
};

ValidationReport validate(const MixedExpJump& jumps);
ValidationReport validate(const H32JParams& params);

/// Throws ParameterError listing all errors (warnings are ignored).
void require_valid(const MixedExpJump& jumps);
void require_valid(const H32JParams& params);

/// Mixture density at y; y = 0 belongs to the upward branch.
double jump_density(const MixedExpJump& jumps, double y);

/// P(Y <= y).
double jump_cdf(const MixedExpJump& jumps, double y);

/// zeta = E[exp(Y) - 1].
double jump_mean_zeta(const MixedExpJump& jumps);

/// Three independent U(0,1) draws consumed by one jump.
struct JumpDraws {
  double branch;
  double component;
  double magnitude;
};

/// Inverse-transform sampler for nonnegative-weight mixtures.
class JumpSampler {
 public:
  /// Throws ParameterError for negative weights (signed mixtures are
  /// supported by the analytics only).
  explicit JumpSampler(const MixedExpJump& jumps);

  double operator()(const JumpDraws& u) const;

 private:
  double p_up_;
  std::vector<double> up_cdf_, up_rate_;
  std::vector<double> down_cdf_, down_rate_;
};

double sample_jump(const MixedExpJump& jumps, const JumpDraws& u);

/// gamma = (r - delta) / sigma_bar_sq + 1/2, the reflection exponent of the
/// up-and-out put.
double gamma_exponent(double r, double delta, double sigma_bar_sq);

}  // namespace jdoi
