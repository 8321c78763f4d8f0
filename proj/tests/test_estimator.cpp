#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "jdoi/estimator.hpp"
#include "oracles/oracles.hpp"

using namespace jdoi;

namespace {

H32JParams degenerate() {
  H32JParams p = H32JParams::table1();
  p.lambda = 0.0;
  p.sigma1 = 0.0;
  p.sigma2 = 0.0;
  return p;
}

ContractSpec contract(ContractKind kind, ExerciseStyle style, double barrier = 0.0) {
  ContractSpec c;
  c.kind = kind;
  c.style = style;
  c.barrier = barrier;
  return c;
}

double se(const EstimatorStats& s) { return s.sample_std / std::sqrt(static_cast<double>(s.n)); }

}  // namespace

TEST_SUITE("estimator") {
  TEST_CASE("aggregate") {
    const auto s = aggregate({1.0, 2.0, 3.0});
    CHECK(s.n == 3);
    CHECK(s.mean == 2.0);
    CHECK(s.sample_std == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.min == 1.0);
    CHECK(s.max == 3.0);
    CHECK(s.ci95_lo == doctest::Approx(2.0 - 1.96 / std::sqrt(3.0)));
    CHECK(s.ci95_hi == doctest::Approx(2.0 + 1.96 / std::sqrt(3.0)));

    const auto c = aggregate(std::vector<double>(7, 0.1));
    CHECK(c.sample_std < 1e-16);
    CHECK(c.mean == 0.1);
    CHECK(c.ci95_lo == doctest::Approx(0.1));
    CHECK(c.ci95_hi == doctest::Approx(0.1));

    std::mt19937_64 g(12345);
    std::normal_distribution<double> z;
    std::vector<double> xs(10000);
    for (double& x : xs) x = z(g);
    const auto n = aggregate(xs);
    CHECK(std::abs(n.mean) <= 0.05);
    CHECK(n.sample_std >= 0.97);
    CHECK(n.sample_std <= 1.03);

    CHECK_THROWS_AS(aggregate({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
  }

  TEST_CASE("zero-variance configuration gives a constant JDOI sample") {
    const auto p = degenerate();
    const MarketState x0{0.0, 100.0, 0.02, 0.005, true};
    const auto c = contract(ContractKind::VanillaPut, ExerciseStyle::European);
    const auto run = european_jdoi(p, c, x0, TimeGrid(0.5, 100), 1000, 3);
    const double v0 = put_price_gbs(p, x0, c.strike, c.maturity);
    CHECK((run.jdoi.max - run.jdoi.min) / run.jdoi.mean < 1e-10);
    CHECK(std::abs(run.jdoi.mean - v0) < 1e-10 * v0);
    CHECK(run.mc.sample_std > 1.0);
  }

  TEST_CASE("knocked out at inception") {
    const auto p = H32JParams::table1();
    const MarketState x0{0.0, 110.0, 0.01, 0.01, true};
    for (auto style : {ExerciseStyle::European, ExerciseStyle::American}) {
      const auto c = contract(ContractKind::UpAndOutPut, style, 110.0);
      const auto run = style == ExerciseStyle::European
                           ? european_jdoi(p, c, x0, TimeGrid(0.5, 20), 200, 1)
                           : american_jdoi(p, c, x0, TimeGrid(0.5, 20), 200, 1);
      for (const auto& s : run.samples) {
        CHECK(s.mc == 0.0);
        CHECK(s.jdoi == 0.0);
      }
      CHECK(run.mc.mean == 0.0);
      CHECK(run.jdoi.mean == 0.0);
    }
  }

  TEST_CASE("sample assembly by hand on a two-step path") {
    const auto p = H32JParams::table1();
    const GbsModel m(p);
    PathBundle b;
    b.grid = TimeGrid(0.5, 2);
    b.n_paths = 2;
    b.s = {100.0, 104.0, 98.0, 100.0, 111.0, 90.0};
    b.nu = {0.01, 0.012, 0.009, 0.01, 0.011, 0.013};
    b.eta = {0.01, 0.008, 0.011, 0.01, 0.009, 0.012};
    b.jump_count = {0, 0};
    mark_knockout(b, 110.0);
    const auto c = contract(ContractKind::UpAndOutPut, ExerciseStyle::European, 110.0);
    const auto pol = european_policy(b, c);
    REQUIRE(pol.exercise_idx == std::vector<int>{2, 1});
    const double v0 = m.price(c, b.state(0, 0));
    const double dt = 0.25;

    const auto alive = jdoi_sample(b, 0, pol, c, m, v0);
    double expect = v0 + std::exp(-p.r * 0.5) * (c.payoff(98.0) - m.price(c, b.state(0, 2)));
    for (int n = 0; n < 2; ++n)
      expect += dt * std::exp(-p.r * b.grid.time(n)) *
                m.operator_difference(c, b.state(0, n), BarrierIntegrability::Extended);
    CHECK(alive.jdoi == doctest::Approx(expect).epsilon(1e-14));
    CHECK(alive.mc == doctest::Approx(std::exp(-p.r * 0.5) * 2.0).epsilon(1e-14));

    // Knocked out at step 1 with spot 111: the step-0 integrand plus the
    // overshoot term, option value 0 against the reflection value there.
    const auto dead = jdoi_sample(b, 1, pol, c, m, v0);
    CHECK(dead.mc == 0.0);
    const double overshoot = m.uop_reflection(b.state(1, 1), 100.0, 110.0, 0.5);
    CHECK(overshoot < 0.0);
    CHECK(dead.jdoi == doctest::Approx(v0 + dt * m.operator_difference(c, b.state(1, 0)) -
                                       std::exp(-p.r * 0.25) * overshoot)
                           .epsilon(1e-14));
    CHECK(dead.path_id == 1);
  }

  TEST_CASE("European put: estimators agree and JDOI is far tighter") {
    const auto p = H32JParams::table1();
    const MarketState x0{0.0, 100.0, 0.01, 0.01, true};
    EstimatorOptions opts;
    opts.threads = 8;
    const auto run = european_jdoi(p, contract(ContractKind::VanillaPut, ExerciseStyle::European),
                                   x0, TimeGrid(0.5, 50), 20000, 17, opts);
    CHECK(std::abs(run.mc.mean - run.jdoi.mean) <= 3.0 * std::hypot(se(run.mc), se(run.jdoi)));
    CHECK(run.jdoi.sample_std <= run.mc.sample_std / 5.0);
    CHECK(run.jdoi.mean > 3.7);
    CHECK(run.jdoi.mean < 4.2);
  }

  TEST_CASE("approximate-market up-and-out put on a grid") {
    // Degenerate model: the generator difference vanishes, so each JDOI
    // sample is v0 plus the overshoot term at a knockout. Both estimators
    // price the discretely monitored contract, which sits above the
    // continuously monitored closed form by the usual continuity correction.
    const auto p = degenerate();
    const MarketState x0{0.0, 100.0, 0.01, 0.01, true};
    const auto c = contract(ContractKind::UpAndOutPut, ExerciseStyle::European, 110.0);
    EstimatorOptions opts;
    opts.threads = 8;
    const int steps = 400;
    const auto run = european_jdoi(p, c, x0, TimeGrid(0.5, steps), 100000, 9, opts);
    const double v0 = uop_price_gbs(p, x0, 100.0, 110.0, 0.5);
    CHECK(std::abs(v0 - oracle::gbs_uop_reflection(p, 100.0, 0.01, 0.01, 100.0, 110.0, 0.5)) <
          1e-10);
    for (const auto& smp : run.samples)
      if (smp.mc > 0.0) CHECK(smp.jdoi == doctest::Approx(v0).epsilon(1e-12));

    const double vol = std::sqrt(deterministic_variance(p, 0.01, 0.01, 0.5));
    const double shifted = 110.0 * std::exp(0.5826 * vol * std::sqrt(0.5 / steps));
    const double corrected = uop_price_gbs(p, x0, 100.0, shifted, 0.5);
    CHECK(run.jdoi.mean > v0 + 3.0 * se(run.jdoi));
    CHECK(std::abs(run.mc.mean - run.jdoi.mean) <= 3.0 * std::hypot(se(run.mc), se(run.jdoi)));
    CHECK(std::abs(run.jdoi.mean - corrected) <= 3.0 * se(run.jdoi) + 0.1 * (corrected - v0));
    CHECK(run.jdoi.sample_std < run.mc.sample_std / 5.0);
  }

  TEST_CASE("American up-and-out below American put on the same paths") {
    const auto p = H32JParams::table1();
    const MarketState x0{0.0, 100.0, 0.01, 0.01, true};
    EstimatorOptions opts;
    opts.threads = 8;
    const TimeGrid g(0.5, 50);
    const auto put =
        american_jdoi(p, contract(ContractKind::VanillaPut, ExerciseStyle::American), x0, g, 4000, 5, opts);
    const auto uop = american_jdoi(
        p, contract(ContractKind::UpAndOutPut, ExerciseStyle::American, 110.0), x0, g, 4000, 5, opts);
    CHECK(uop.jdoi.mean <= put.jdoi.mean + 3.0 * std::hypot(se(uop.jdoi), se(put.jdoi)));
    CHECK(uop.mc.mean <= put.mc.mean + 3.0 * std::hypot(se(uop.mc), se(put.mc)));
    CHECK(put.jdoi.sample_std < put.mc.sample_std);
    CHECK(uop.jdoi.sample_std < uop.mc.sample_std);
    CHECK(std::abs(put.mc.mean - put.jdoi.mean) <= 3.0 * std::hypot(se(put.mc), se(put.jdoi)));
  }

  TEST_CASE("threads and plain-only mode") {
    const auto p = H32JParams::table1();
    const MarketState x0{0.0, 100.0, 0.01, 0.01, true};
    const auto c = contract(ContractKind::VanillaPut, ExerciseStyle::American);
    const TimeGrid g(0.5, 20);
    EstimatorOptions one, eight, plain;
    eight.threads = 8;
    plain.jdoi = false;
    const auto a = american_jdoi(p, c, x0, g, 1000, 8, one);
    const auto b = american_jdoi(p, c, x0, g, 1000, 8, eight);
    const auto m = american_jdoi(p, c, x0, g, 1000, 8, plain);
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
      CHECK(a.samples[k].mc == b.samples[k].mc);
      CHECK(a.samples[k].jdoi == b.samples[k].jdoi);
      CHECK(a.samples[k].mc == m.samples[k].mc);
      CHECK(m.samples[k].jdoi == 0.0);
    }
    CHECK_FALSE(m.has_jdoi);
  }

  TEST_CASE("out-of-sample pricing uses a fresh bundle") {
    const auto p = H32JParams::table1();
    const MarketState x0{0.0, 100.0, 0.01, 0.01, true};
    const auto c = contract(ContractKind::VanillaPut, ExerciseStyle::American);
    const TimeGrid g(0.5, 50);
    EstimatorOptions in, out;
    in.threads = out.threads = 8;
    out.out_of_sample = true;
    const auto a = american_jdoi(p, c, x0, g, 4000, 31, in);
    const auto b = american_jdoi(p, c, x0, g, 4000, 31, out);
    CHECK(a.samples[0].mc != b.samples[0].mc);
    CHECK(std::abs(a.jdoi.mean - b.jdoi.mean) <= 3.0 * std::hypot(se(a.jdoi), se(b.jdoi)) + 0.02);
  }

  TEST_CASE("setup checks") {
    const auto p = H32JParams::table1();
    const MarketState x0{0.0, 100.0, 0.01, 0.01, true};
    const auto euro = contract(ContractKind::VanillaPut, ExerciseStyle::European);
    const auto amer = contract(ContractKind::VanillaPut, ExerciseStyle::American);
    CHECK_THROWS_AS(european_jdoi(p, amer, x0, TimeGrid(0.5, 10), 10, 1), ParameterError);
    CHECK_THROWS_AS(american_jdoi(p, euro, x0, TimeGrid(0.5, 10), 10, 1), ParameterError);
    CHECK_THROWS_AS(european_jdoi(p, euro, x0, TimeGrid(1.0, 10), 10, 1), ParameterError);
    CHECK_THROWS_AS(european_jdoi(p, euro, {0.1, 100.0, 0.01, 0.01, true}, TimeGrid(0.5, 10), 10, 1),
                    ParameterError);
  }
}
