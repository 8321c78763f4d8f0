#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jdoi/estimator.hpp"

namespace jdoi {

inline constexpr const char* kToolVersion = "0.1.0";

// Malformed or inconsistent run configuration (field-level message).
class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

enum class EstimatorChoice { Mc, Jdoi, Both };
enum class OutputFormat { Csv, Json };

struct RunConfig {
  H32JParams params;
  double S0 = 100.0;
  double nu0 = 0.01;
  double eta0 = 0.01;
  ContractSpec contract;  // defaults: European put, K = 100, T = 0.5
  std::optional<double> barrier;
  int steps = 100;
  std::size_t paths = 10000;
  int runs = 1;
  std::uint64_t seed = 1;
  EstimatorChoice estimator = EstimatorChoice::Both;
  OutputFormat format = OutputFormat::Csv;
  std::string out;
  unsigned threads = 1;
  bool out_of_sample = false;
  BasisSpec basis;
  std::vector<double> table2_S0{90, 95, 100, 105, 110};
  std::vector<double> table2_H{110, 115, 120};
  // General mixtures; folded into params.jumps by validate_config.
  std::vector<double> up_rates, up_weights, down_rates, down_weights;

  MarketState initial_state() const { return {0.0, S0, nu0, eta0, true}; }
};

// key=value lines, '#' starts a comment. Keys follow the parameter table
// (S0 nu0 eta0 r d kappa1 kappa2 theta1 theta2 sigma1 sigma2 rho1 rho2 a b p
// lambda T) plus c1 c2 contract style K H steps paths runs seed estimator
// format out threads out_of_sample, basis_order basis_nu basis_eta
// basis_cross, table2_S0 table2_H, and comma lists up_rates up_weights
// down_rates down_weights for general mixtures.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Applies one key=value assignment; throws ConfigError.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Throws ConfigError listing every problem.
void validate_config(RunConfig& cfg);

// Canonical key=value dump and its 64-bit FNV-1a hash (hex).
std::string canonical_config(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

// One seeded repetition of the configured contract.
EstimatorRun run_once(const RunConfig& cfg, std::uint64_t seed);

std::string cmd_price(const RunConfig& cfg);
std::string cmd_table2(const RunConfig& cfg);
std::string cmd_scaling(const RunConfig& cfg, const std::string& axis,
                        const std::vector<long>& values);
std::string cmd_histogram(const RunConfig& cfg);

}  // namespace jdoi
