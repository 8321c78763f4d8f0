#include "jdoi/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jdoi {

MixedExpJump MixedExpJump::double_exponential(double p, double a, double b) {
  MixedExpJump j;
  j.p_up = p;
  j.up = {{1.0, a}};
  j.down = {{1.0, b}};
  return j;
}

H32JParams H32JParams::table1() { return H32JParams{}; }

double ContractSpec::payoff(double s, bool alive) const {
  if (!alive) return 0.0;
  if (is_barrier() && s >= barrier) return 0.0;
  return std::max(strike - s, 0.0);
}

void ContractSpec::check() const {
  if (!(strike > 0.0)) throw ParameterError("contract: strike K must be > 0");
  if (!(maturity > 0.0)) throw ParameterError("contract: maturity T must be > 0");
  if (is_barrier() && !(barrier > 0.0))
    throw ParameterError("contract: up-and-out put requires a barrier H > 0");
}

bool ValidationReport::has_errors() const {
  return std::any_of(issues.begin(), issues.end(),
                     [](const ValidationIssue& i) { return i.severity == Severity::Error; });
}

bool ValidationReport::contains(const std::string& name) const {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const ValidationIssue& i) { return i.name == name; });
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& i : issues) {
    os << (i.severity == Severity::Error ? "error: " : "warning: ") << i.name;
    if (!i.detail.empty()) os << " (" << i.detail << ")";
    os << '\n';
  }
  return os.str();
}

namespace {

void add(ValidationReport& rep, std::string name, Severity sev, std::string detail = {}) {
  rep.issues.push_back({std::move(name), sev, std::move(detail)});
}

bool branch_used(double mass) { return mass > 0.0; }

}  // namespace

ValidationReport validate(const MixedExpJump& jumps) {
  ValidationReport rep;
  const double pu = jumps.p_up;
  if (!(pu >= 0.0 && pu <= 1.0)) add(rep, "p_u in [0,1]", Severity::Error);

  const bool use_up = branch_used(pu) || !jumps.up.empty();
  const bool use_down = branch_used(1.0 - pu) || !jumps.down.empty();

  if (use_up) {
    if (jumps.up.empty()) {
      add(rep, "sum p_i = 1", Severity::Error, "no upward components");
    } else {
      double sum = 0.0;
      bool rates_ok = true;
      for (const auto& c : jumps.up) {
        sum += c.weight;
        rates_ok = rates_ok && c.rate > 1.0;
      }
      if (std::abs(sum - 1.0) > 1e-12) add(rep, "sum p_i = 1", Severity::Error);
      if (!rates_ok) add(rep, "a_i > 1", Severity::Error);
      if (!(jumps.up.front().weight > 0.0)) add(rep, "p_1 > 0", Severity::Error);
    }
  }
  if (use_down) {
    if (jumps.down.empty()) {
      add(rep, "sum q_j = 1", Severity::Error, "no downward components");
    } else {
      double sum = 0.0;
      bool rates_ok = true;
      for (const auto& c : jumps.down) {
        sum += c.weight;
        rates_ok = rates_ok && c.rate > 0.0;
      }
      if (std::abs(sum - 1.0) > 1e-12) add(rep, "sum q_j = 1", Severity::Error);
      if (!rates_ok) add(rep, "b_j > 0", Severity::Error);
      if (!(jumps.down.front().weight > 0.0)) add(rep, "q_1 > 0", Severity::Error);
    }
  }

  // Necessary: full sums of weight*rate nonnegative. Sufficient: every
  // partial sum nonnegative.
  auto partial_sums = [](const std::vector<ExpComponent>& cs, bool& total_ok, bool& all_ok) {
    double acc = 0.0;
    total_ok = all_ok = true;
    for (const auto& c : cs) {
      acc += c.weight * c.rate;
      if (acc < 0.0) all_ok = false;
    }
    total_ok = acc >= 0.0;
  };
  bool up_total = true, up_all = true, down_total = true, down_all = true;
  if (use_up) partial_sums(jumps.up, up_total, up_all);
  if (use_down) partial_sums(jumps.down, down_total, down_all);
  if (!up_total) add(rep, "sum p_i a_i >= 0", Severity::Error);
  if (!down_total) add(rep, "sum q_j b_j >= 0", Severity::Error);
  if (up_total && down_total && !(up_all && down_all))
    add(rep, "sufficient nonnegativity", Severity::Warning,
        "partial sums of weight*rate change sign; density nonnegativity not guaranteed");
  return rep;
}

ValidationReport validate(const H32JParams& p) {
  ValidationReport rep;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0)) add(rep, std::string(name) + " > 0", Severity::Error);
  };
  // A zero vol-of-vol collapses the factor onto its deterministic trend. It
  // is outside the model's stated range but is a legitimate degenerate case.
  auto vol_of_vol = [&](double v, const char* name) {
    if (v < 0.0 || !std::isfinite(v))
      add(rep, std::string(name) + " > 0", Severity::Error);
    else if (v == 0.0)
      add(rep, std::string(name) + " > 0", Severity::Warning, "degenerate deterministic factor");
  };
  positive(p.kappa1, "kappa1");
  positive(p.kappa2, "kappa2");
  positive(p.theta1, "theta1");
  positive(p.theta2, "theta2");
  vol_of_vol(p.sigma1, "sigma1");
  vol_of_vol(p.sigma2, "sigma2");
  if (!(p.rho1 >= -1.0 && p.rho1 <= 1.0)) add(rep, "rho1 in [-1,1]", Severity::Error);
  if (!(p.rho2 >= -1.0 && p.rho2 <= 1.0)) add(rep, "rho2 in [-1,1]", Severity::Error);
  if (!(p.lambda >= 0.0)) add(rep, "lambda >= 0", Severity::Error);
  if (!std::isfinite(p.r) || !std::isfinite(p.delta) || !std::isfinite(p.c1) ||
      !std::isfinite(p.c2))
    add(rep, "finite r, delta, c1, c2", Severity::Error);

  if (2.0 * p.kappa1 * p.theta1 < p.sigma1 * p.sigma1) add(rep, "Feller factor 1", Severity::Error);

  // The 3/2 factor is the reciprocal of a CIR process with these parameters.
  if (p.kappa2 > 0.0 && p.theta2 > 0.0) {
    const double kappa_star = p.kappa2 * p.theta2;
    const double theta_star = (p.kappa2 + p.sigma2 * p.sigma2) / kappa_star;
    const double sigma_star = -p.sigma2;
    if (2.0 * kappa_star * theta_star < sigma_star * sigma_star)
      add(rep, "Feller factor 2", Severity::Error);
  }

  auto jump_rep = validate(p.jumps);
  rep.issues.insert(rep.issues.end(), jump_rep.issues.begin(), jump_rep.issues.end());
  return rep;
}

void require_valid(const MixedExpJump& jumps) {
  auto rep = validate(jumps);
  if (rep.has_errors()) throw ParameterError("invalid jump mixture:\n" + rep.to_string());
}

void require_valid(const H32JParams& params) {
  auto rep = validate(params);
  if (rep.has_errors()) throw ParameterError("invalid model parameters:\n" + rep.to_string());
}

double jump_density(const MixedExpJump& jumps, double y) {
  require_valid(jumps);
  double acc = 0.0;
  if (y >= 0.0) {
    for (const auto& c : jumps.up) acc += c.weight * c.rate * std::exp(-c.rate * y);
    return jumps.p_up * acc;
  }
  for (const auto& c : jumps.down) acc += c.weight * c.rate * std::exp(c.rate * y);
  return jumps.q_down() * acc;
}

double jump_cdf(const MixedExpJump& jumps, double y) {
  double acc = 0.0;
  if (y < 0.0) {
    for (const auto& c : jumps.down) acc += c.weight * std::exp(c.rate * y);
    return jumps.q_down() * acc;
  }
  for (const auto& c : jumps.up) acc += c.weight * -std::expm1(-c.rate * y);
  return jumps.q_down() + jumps.p_up * acc;
}

double jump_mean_zeta(const MixedExpJump& jumps) {
  double up = 0.0, down = 0.0;
  for (const auto& c : jumps.up) {
    if (!(c.rate > 1.0))
      throw DomainError("E[exp(Y)] diverges: upward rate a_i = " + std::to_string(c.rate) +
                        " must exceed 1");
    up += c.weight * c.rate / (c.rate - 1.0);
  }
  for (const auto& c : jumps.down) down += c.weight * c.rate / (c.rate + 1.0);
  // Written as deviations from 1 so vanishing jumps give an exact 0.
  const double up_dev = jumps.up.empty() ? 0.0 : up - 1.0;
  const double down_dev = jumps.down.empty() ? 0.0 : down - 1.0;
  return jumps.p_up * up_dev + jumps.q_down() * down_dev;
}

JumpSampler::JumpSampler(const MixedExpJump& jumps) : p_up_(jumps.p_up) {
  require_valid(jumps);
  auto build = [](const std::vector<ExpComponent>& cs, std::vector<double>& cdf,
                  std::vector<double>& rate) {
    double acc = 0.0;
    for (const auto& c : cs) {
      if (c.weight < 0.0)
        throw ParameterError(
            "jump sampler: negative mixture weights are not supported (got " +
            std::to_string(c.weight) + ")");
      acc += c.weight;
      cdf.push_back(acc);
      rate.push_back(c.rate);
    }
    if (!cdf.empty()) cdf.back() = 1.0;
  };
  build(jumps.up, up_cdf_, up_rate_);
  build(jumps.down, down_cdf_, down_rate_);
}

double JumpSampler::operator()(const JumpDraws& u) const {
  const bool up = u.branch < p_up_;
  const auto& cdf = up ? up_cdf_ : down_cdf_;
  const auto& rate = up ? up_rate_ : down_rate_;
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u.component);
  const std::size_t k = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
  const double e = -std::log1p(-u.magnitude) / rate[k];
  return up ? e : -e;
}

double sample_jump(const MixedExpJump& jumps, const JumpDraws& u) { return JumpSampler(jumps)(u); }

double gamma_exponent(double r, double delta, double sigma_bar_sq) {
  if (!(sigma_bar_sq > 0.0))
    throw DomainError("gamma exponent requires sigma_bar^2 > 0, got " +
                      std::to_string(sigma_bar_sq));
  return (r - delta) / sigma_bar_sq + 0.5;
}

}  // namespace jdoi
