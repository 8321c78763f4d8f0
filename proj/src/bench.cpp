#include "jdoi/bench.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace jdoi {

namespace {

using nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': expected a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': expected an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("field '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError("field '" + key + "': empty list");
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string list_str(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt(xs[i]);
  return s;
}

const char* estimator_name(EstimatorChoice e) {
  switch (e) {
    case EstimatorChoice::Mc: return "mc";
    case EstimatorChoice::Jdoi: return "jdoi";
    default: return "both";
  }
}

std::vector<ExpComponent> zip(const std::string& what, const std::vector<double>& rates,
                              std::vector<double> weights) {
  if (weights.empty()) weights.assign(rates.size(), 1.0 / static_cast<double>(rates.size()));
  if (weights.size() != rates.size())
    throw ConfigError("fields '" + what + "_rates' and '" + what +
                      "_weights': lists differ in length");
  std::vector<ExpComponent> cs;
  for (std::size_t i = 0; i < rates.size(); ++i) cs.push_back({weights[i], rates[i]});
  return cs;
}

std::string header(const RunConfig& cfg) {
  return std::string("# jdoi-bench ") + kToolVersion + " config=" + config_hash(cfg) + "\n";
}

std::string stats_csv(const EstimatorStats& s) {
  return std::to_string(s.n) + "," + fmt(s.mean) + "," + fmt(s.sample_std) + "," +
         fmt(s.ci95_lo) + "," + fmt(s.ci95_hi) + "," + fmt(s.min) + "," + fmt(s.max);
}

ordered_json stats_json(const EstimatorStats& s) {
  return {{"n", s.n},           {"mean", s.mean},       {"stddev", s.sample_std},
          {"ci_lo", s.ci95_lo}, {"ci_hi", s.ci95_hi}, {"min", s.min},
          {"max", s.max}};
}

std::vector<std::string> wanted(const RunConfig& cfg) {
  switch (cfg.estimator) {
    case EstimatorChoice::Mc: return {"mc"};
    case EstimatorChoice::Jdoi: return {"jdoi"};
    default: return {"mc", "jdoi"};
  }
}

const EstimatorStats& pick(const EstimatorRun& r, const std::string& name) {
  return name == "mc" ? r.mc : r.jdoi;
}

// Run-level estimates for every requested estimator across cfg.runs seeds.
struct Repetitions {
  std::vector<EstimatorRun> runs;
  std::map<std::string, std::vector<double>> means;
};

Repetitions repeat(const RunConfig& cfg) {
  Repetitions rep;
  for (int i = 0; i < cfg.runs; ++i) {
    rep.runs.push_back(run_once(cfg, cfg.seed + static_cast<std::uint64_t>(i)));
    for (const auto& e : wanted(cfg)) rep.means[e].push_back(pick(rep.runs.back(), e).mean);
  }
  return rep;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json json_envelope(const RunConfig& cfg, const char* command) {
  return {{"tool", "jdoi-bench"},
          {"version", kToolVersion},
          {"config", config_hash(cfg)},
          {"command", command}};
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& v) {
  auto& p = cfg.params;
  auto num = [&] { return to_double(key, v); };
  auto positive_int = [&](long long lo) {
    const long long x = to_integer(key, v);
    if (x < lo) throw ConfigError("field '" + key + "': must be >= " + std::to_string(lo));
    return x;
  };
  if (key == "S0") cfg.S0 = num();
  else if (key == "nu0") cfg.nu0 = num();
  else if (key == "eta0") cfg.eta0 = num();
  else if (key == "r") p.r = num();
  else if (key == "d" || key == "delta") p.delta = num();
  else if (key == "kappa1") p.kappa1 = num();
  else if (key == "kappa2") p.kappa2 = num();
  else if (key == "theta1") p.theta1 = num();
  else if (key == "theta2") p.theta2 = num();
  else if (key == "sigma1") p.sigma1 = num();
  else if (key == "sigma2") p.sigma2 = num();
  else if (key == "rho1") p.rho1 = num();
  else if (key == "rho2") p.rho2 = num();
  else if (key == "lambda") p.lambda = num();
  else if (key == "c1") p.c1 = num();
  else if (key == "c2") p.c2 = num();
  else if (key == "p") p.jumps.p_up = num();
  else if (key == "a") {
    p.jumps.up = {{1.0, num()}};
    cfg.up_rates.clear();
    cfg.up_weights.clear();
  } else if (key == "b") {
    p.jumps.down = {{1.0, num()}};
    cfg.down_rates.clear();
    cfg.down_weights.clear();
  } else if (key == "up_rates") cfg.up_rates = to_list(key, v);
  else if (key == "up_weights") cfg.up_weights = to_list(key, v);
  else if (key == "down_rates") cfg.down_rates = to_list(key, v);
  else if (key == "down_weights") cfg.down_weights = to_list(key, v);
  else if (key == "T") cfg.contract.maturity = num();
  else if (key == "K") cfg.contract.strike = num();
  else if (key == "H") cfg.barrier = num();
  else if (key == "contract") {
    if (v == "put") cfg.contract.kind = ContractKind::VanillaPut;
    else if (v == "uop") cfg.contract.kind = ContractKind::UpAndOutPut;
    else throw ConfigError("field 'contract': expected put|uop, got '" + v + "'");
  } else if (key == "style") {
    if (v == "euro") cfg.contract.style = ExerciseStyle::European;
    else if (v == "amer") cfg.contract.style = ExerciseStyle::American;
    else throw ConfigError("field 'style': expected euro|amer, got '" + v + "'");
  } else if (key == "estimator") {
    if (v == "mc") cfg.estimator = EstimatorChoice::Mc;
    else if (v == "jdoi") cfg.estimator = EstimatorChoice::Jdoi;
    else if (v == "both") cfg.estimator = EstimatorChoice::Both;
    else throw ConfigError("field 'estimator': expected mc|jdoi|both, got '" + v + "'");
  } else if (key == "format") {
    if (v == "csv") cfg.format = OutputFormat::Csv;
    else if (v == "json") cfg.format = OutputFormat::Json;
    else throw ConfigError("field 'format': expected csv|json, got '" + v + "'");
  } else if (key == "steps") cfg.steps = static_cast<int>(positive_int(1));
  else if (key == "paths") cfg.paths = static_cast<std::size_t>(positive_int(2));
  else if (key == "runs") cfg.runs = static_cast<int>(positive_int(1));
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(positive_int(0));
  else if (key == "threads") cfg.threads = static_cast<unsigned>(positive_int(0));
  else if (key == "out") cfg.out = v;
  else if (key == "out_of_sample") cfg.out_of_sample = to_bool(key, v);
  else if (key == "basis_order") cfg.basis.spot_order = static_cast<int>(positive_int(0));
  else if (key == "basis_nu") cfg.basis.include_nu = to_bool(key, v);
  else if (key == "basis_eta") cfg.basis.include_eta = to_bool(key, v);
  else if (key == "basis_cross") cfg.basis.cross_terms = to_bool(key, v);
  else if (key == "table2_S0") cfg.table2_S0 = to_list(key, v);
  else if (key == "table2_H") cfg.table2_H = to_list(key, v);
  else throw ConfigError("unknown field '" + key + "'");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void validate_config(RunConfig& cfg) {
  if (!cfg.up_rates.empty()) {
    cfg.params.jumps.up = zip("up", cfg.up_rates, cfg.up_weights);
  } else if (!cfg.up_weights.empty()) {
    throw ConfigError("field 'up_weights' given without 'up_rates'");
  }
  if (!cfg.down_rates.empty()) {
    cfg.params.jumps.down = zip("down", cfg.down_rates, cfg.down_weights);
  } else if (!cfg.down_weights.empty()) {
    throw ConfigError("field 'down_weights' given without 'down_rates'");
  }

  std::string errors;
  auto fail = [&](const std::string& msg) { errors += "  " + msg + "\n"; };
  if (cfg.contract.is_barrier()) {
    if (!cfg.barrier) fail("field 'H': required for contract=uop");
    else cfg.contract.barrier = *cfg.barrier;
  } else if (cfg.barrier) {
    fail("field 'H': only valid for contract=uop");
  }
  if (!(cfg.contract.strike > 0.0)) fail("field 'K': must be > 0");
  if (!(cfg.contract.maturity > 0.0)) fail("field 'T': must be > 0");
  if (cfg.contract.is_barrier() && cfg.barrier && !(*cfg.barrier > 0.0))
    fail("field 'H': must be > 0");
  if (!(cfg.S0 > 0.0)) fail("field 'S0': must be > 0");
  if (!(cfg.nu0 >= 0.0)) fail("field 'nu0': must be >= 0");
  if (!(cfg.eta0 >= 0.0)) fail("field 'eta0': must be >= 0");
  if (cfg.runs < 1) fail("field 'runs': must be >= 1");
  if (cfg.paths < 2) fail("field 'paths': must be >= 2");
  if (cfg.steps < 1) fail("field 'steps': must be >= 1");
  const auto rep = validate(cfg.params);
  for (const auto& i : rep.issues)
    if (i.severity == Severity::Error) fail("model: " + i.name + (i.detail.empty() ? "" : " (" + i.detail + ")"));
  if (!errors.empty()) throw ConfigError("invalid configuration:\n" + errors);
}

std::string canonical_config(const RunConfig& cfg) {
  const auto& p = cfg.params;
  std::vector<double> ur, uw, dr, dw;
  for (const auto& c : p.jumps.up) ur.push_back(c.rate), uw.push_back(c.weight);
  for (const auto& c : p.jumps.down) dr.push_back(c.rate), dw.push_back(c.weight);
  std::ostringstream os;
  os << "S0=" << fmt(cfg.S0) << "\nnu0=" << fmt(cfg.nu0) << "\neta0=" << fmt(cfg.eta0)
     << "\nr=" << fmt(p.r) << "\nd=" << fmt(p.delta) << "\nkappa1=" << fmt(p.kappa1)
     << "\nkappa2=" << fmt(p.kappa2) << "\ntheta1=" << fmt(p.theta1)
     << "\ntheta2=" << fmt(p.theta2) << "\nsigma1=" << fmt(p.sigma1)
     << "\nsigma2=" << fmt(p.sigma2) << "\nrho1=" << fmt(p.rho1) << "\nrho2=" << fmt(p.rho2)
     << "\np=" << fmt(p.jumps.p_up) << "\nup_rates=" << list_str(ur)
     << "\nup_weights=" << list_str(uw) << "\ndown_rates=" << list_str(dr)
     << "\ndown_weights=" << list_str(dw) << "\nlambda=" << fmt(p.lambda)
     << "\nT=" << fmt(cfg.contract.maturity) << "\nc1=" << fmt(p.c1) << "\nc2=" << fmt(p.c2)
     << "\ncontract=" << (cfg.contract.is_barrier() ? "uop" : "put")
     << "\nstyle=" << (cfg.contract.is_american() ? "amer" : "euro")
     << "\nK=" << fmt(cfg.contract.strike)
     << "\nH=" << (cfg.barrier ? fmt(*cfg.barrier) : std::string("none"))
     << "\nsteps=" << cfg.steps << "\npaths=" << cfg.paths << "\nruns=" << cfg.runs
     << "\nseed=" << cfg.seed << "\nestimator=" << estimator_name(cfg.estimator)
     << "\nout_of_sample=" << (cfg.out_of_sample ? 1 : 0)
     << "\nbasis_order=" << cfg.basis.spot_order << "\nbasis_nu=" << cfg.basis.include_nu
     << "\nbasis_eta=" << cfg.basis.include_eta << "\nbasis_cross=" << cfg.basis.cross_terms
     << "\ntable2_S0=" << list_str(cfg.table2_S0) << "\ntable2_H=" << list_str(cfg.table2_H)
     << "\n";
  // Thread count, output path and format do not change the numbers.
  return os.str();
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

EstimatorRun run_once(const RunConfig& cfg, std::uint64_t seed) {
  const TimeGrid grid(cfg.contract.maturity, cfg.steps);
  EstimatorOptions opts;
  opts.jdoi = cfg.estimator != EstimatorChoice::Mc;
  opts.out_of_sample = cfg.out_of_sample;
  opts.basis = cfg.basis;
  opts.threads = cfg.threads;
  const MarketState x0 = cfg.initial_state();
  return cfg.contract.is_american()
             ? american_jdoi(cfg.params, cfg.contract, x0, grid, cfg.paths, seed, opts)
             : european_jdoi(cfg.params, cfg.contract, x0, grid, cfg.paths, seed, opts);
}

std::string cmd_price(const RunConfig& cfg) {
  const Repetitions rep = repeat(cfg);
  if (cfg.format == OutputFormat::Json) {
    ordered_json j = json_envelope(cfg, "price");
    ordered_json runs = ordered_json::array();
    for (int i = 0; i < cfg.runs; ++i) {
      const auto& r = rep.runs[static_cast<std::size_t>(i)];
      ordered_json row = {{"run", i}, {"seed", cfg.seed + static_cast<std::uint64_t>(i)}};
      for (const auto& e : wanted(cfg)) row[e] = stats_json(pick(r, e));
      row["warnings"] = r.warnings;
      runs.push_back(row);
    }
    j["runs"] = runs;
    if (cfg.runs >= 2) {
      ordered_json summary;
      for (const auto& e : wanted(cfg)) summary[e] = stats_json(aggregate(rep.means.at(e)));
      j["summary"] = summary;
    }
    return dump(j);
  }
  std::string out = header(cfg);
  out += "record,run,seed,estimator,n,mean,stddev,ci_lo,ci_hi,min,max\n";
  for (int i = 0; i < cfg.runs; ++i) {
    const auto& r = rep.runs[static_cast<std::size_t>(i)];
    for (const auto& e : wanted(cfg))
      out += "run," + std::to_string(i) + "," +
             std::to_string(cfg.seed + static_cast<std::uint64_t>(i)) + "," + e + "," +
             stats_csv(pick(r, e)) + "\n";
  }
  if (cfg.runs >= 2)
    for (const auto& e : wanted(cfg))
      out += "summary,,," + e + "," + stats_csv(aggregate(rep.means.at(e))) + "\n";
  return out;
}

std::string cmd_table2(const RunConfig& base) {
  if (base.runs < 2) throw ConfigError("field 'runs': table2 needs at least 2 runs per cell");
  ordered_json cells = ordered_json::array();
  std::string out = header(base);
  out += "S0,H,estimator,mean,stddev,ci_lo,ci_hi,min,max\n";
  for (double s0 : base.table2_S0) {
    for (double h : base.table2_H) {
      RunConfig cfg = base;
      cfg.S0 = s0;
      cfg.barrier = h;
      cfg.contract.kind = ContractKind::UpAndOutPut;
      cfg.contract.barrier = h;
      const Repetitions rep = repeat(cfg);
      for (const auto& e : wanted(cfg)) {
        const EstimatorStats st = aggregate(rep.means.at(e));
        out += fmt(s0) + "," + fmt(h) + "," + e + "," + fmt(st.mean) + "," + fmt(st.sample_std) +
               "," + fmt(st.ci95_lo) + "," + fmt(st.ci95_hi) + "," + fmt(st.min) + "," +
               fmt(st.max) + "\n";
        ordered_json cell = {{"S0", s0}, {"H", h}, {"estimator", e}};
        cell.update(stats_json(st));
        cells.push_back(cell);
      }
    }
  }
  if (base.format == OutputFormat::Json) {
    ordered_json j = json_envelope(base, "table2");
    j["cells"] = cells;
    return dump(j);
  }
  return out;
}

std::string cmd_scaling(const RunConfig& base, const std::string& axis,
                        const std::vector<long>& values) {
  if (axis != "steps" && axis != "paths")
    throw ConfigError("scaling: axis must be steps or paths, got '" + axis + "'");
  if (values.empty()) throw ConfigError("scaling: no axis values given");
  if (base.runs < 2) throw ConfigError("field 'runs': scaling needs at least 2 runs per point");
  ordered_json points = ordered_json::array();
  std::string out = header(base);
  out += "axis,value,estimator,mean,stddev,ci_lo,ci_hi,min,max\n";
  for (long v : values) {
    RunConfig cfg = base;
    if (axis == "steps") {
      if (v < 1) throw ConfigError("scaling: steps values must be >= 1");
      cfg.steps = static_cast<int>(v);
    } else {
      if (v < 2) throw ConfigError("scaling: paths values must be >= 2");
      cfg.paths = static_cast<std::size_t>(v);
    }
    const Repetitions rep = repeat(cfg);
    for (const auto& e : wanted(cfg)) {
      const EstimatorStats st = aggregate(rep.means.at(e));
      out += axis + "," + std::to_string(v) + "," + e + "," + fmt(st.mean) + "," +
             fmt(st.sample_std) + "," + fmt(st.ci95_lo) + "," + fmt(st.ci95_hi) + "," +
             fmt(st.min) + "," + fmt(st.max) + "\n";
      ordered_json pt = {{"axis", axis}, {"value", v}, {"estimator", e}};
      pt.update(stats_json(st));
      points.push_back(pt);
    }
  }
  if (base.format == OutputFormat::Json) {
    ordered_json j = json_envelope(base, "scaling");
    j["points"] = points;
    return dump(j);
  }
  return out;
}

std::string cmd_histogram(const RunConfig& cfg) {
  const Repetitions rep = repeat(cfg);
  if (cfg.format == OutputFormat::Json) {
    ordered_json j = json_envelope(cfg, "histogram");
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < cfg.runs; ++i)
      for (const auto& e : wanted(cfg))
        rows.push_back({{"run", i}, {"estimator", e},
                        {"estimate", rep.means.at(e)[static_cast<std::size_t>(i)]}});
    j["rows"] = rows;
    return dump(j);
  }
  std::string out = header(cfg);
  out += "run,estimator,estimate\n";
  for (int i = 0; i < cfg.runs; ++i)
    for (const auto& e : wanted(cfg))
      out += std::to_string(i) + "," + e + "," + fmt(rep.means.at(e)[static_cast<std::size_t>(i)]) +
             "\n";
  return out;
}

}  // namespace jdoi
