#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "jdoi/model.hpp"
#include "jdoi/paths.hpp"

namespace jdoi {

struct BasisSpec {
  int spot_order = 2;
  bool include_nu = true;
  bool include_eta = true;
  bool cross_terms = false;

  std::size_t columns() const;
};

// Laguerre polynomial L_k(x) by the three-term recurrence.
double laguerre(double x, int k);

// [L_0(s/K) .. L_order(s/K), nu, eta, nu*s/K, eta*s/K] as enabled.
std::vector<double> design_row(const MarketState& state, const BasisSpec& spec, double strike);

struct StoppingPolicy {
  int n_steps = 0;
  // Grid index of exercise, knockout, or n_steps when held to maturity.
  std::vector<int> exercise_idx;
  // Payoff collected at exercise_idx (0 when knocked out or expiring OTM).
  std::vector<double> cashflow;
  std::vector<std::string> warnings;
  // The rule itself, for replay on other paths: per-step continuation
  // coefficients (empty where no regression ran) and the t_0 decision.
  std::vector<std::vector<double>> coefficients;
  bool exercise_at_t0 = false;
};

// Hold to maturity, stopping only at knockout.
StoppingPolicy european_policy(const PathBundle& bundle, const ContractSpec& contract);

StoppingPolicy backward_induct(const PathBundle& bundle, const ContractSpec& contract,
                               const H32JParams& params, const BasisSpec& spec = {});

// Applies a fitted rule forward on another bundle; on the bundle it was
// fitted on this reproduces the in-sample policy.
StoppingPolicy apply_policy(const PathBundle& bundle, const ContractSpec& contract,
                            const StoppingPolicy& rule, const BasisSpec& spec = {});

// Mean of e^{-r t} * cashflow over paths.
double policy_value(const PathBundle& bundle, const StoppingPolicy& policy, double r);

}  // namespace jdoi
