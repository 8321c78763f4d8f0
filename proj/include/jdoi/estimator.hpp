#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "jdoi/gbs.hpp"
#include "jdoi/lsmc.hpp"
#include "jdoi/paths.hpp"

namespace jdoi {

struct SamplePair {
  double mc = 0.0;
  double jdoi = 0.0;
  std::size_t path_id = 0;
};

struct EstimatorStats {
  std::size_t n = 0;
  double mean = 0.0;
  double sample_std = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Bessel-corrected std and a normal 95% interval; throws for n < 2.
EstimatorStats aggregate(const std::vector<double>& xs);

struct EstimatorOptions {
  // false: plain discounted payoffs only, the approximate market is never
  // evaluated and the jdoi fields stay 0.
  bool jdoi = true;
  // Price on a fresh bundle instead of the one the exercise rule was fit on.
  bool out_of_sample = false;
  BasisSpec basis;
  unsigned threads = 1;
};

struct EstimatorRun {
  std::vector<SamplePair> samples;
  EstimatorStats mc;
  EstimatorStats jdoi;
  bool has_jdoi = false;
  std::vector<std::string> warnings;
};

// Discounted payoff at the stopping index, 0 if knocked out first.
double mc_sample(const PathBundle& bundle, std::size_t path, const StoppingPolicy& policy,
                 const ContractSpec& contract, double r);

// Pathwise JDOI sample; v0 is the approximate-market value at the initial
// state (the same for every path).
SamplePair jdoi_sample(const PathBundle& bundle, std::size_t path, const StoppingPolicy& policy,
                       const ContractSpec& contract, const GbsModel& model, double v0);

EstimatorRun european_jdoi(const H32JParams& params, const ContractSpec& contract,
                           const MarketState& x0, const TimeGrid& grid, std::size_t n_paths,
                           std::uint64_t seed, const EstimatorOptions& opts = {});

EstimatorRun american_jdoi(const H32JParams& params, const ContractSpec& contract,
                           const MarketState& x0, const TimeGrid& grid, std::size_t n_paths,
                           std::uint64_t seed, const EstimatorOptions& opts = {});

// Evaluates both estimators on a given bundle and policy.
EstimatorRun evaluate_policy(const PathBundle& bundle, const StoppingPolicy& policy,
                             const H32JParams& params, const ContractSpec& contract,
                             const MarketState& x0, const EstimatorOptions& opts = {});

}  // namespace jdoi
