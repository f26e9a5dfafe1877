#include "addreg/design.hpp"
#include "addreg/rng.hpp"
#include "addreg/simulation.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>

using namespace addreg;

TEST_CASE("philox known answers")
{
  using B = Philox4x32::Block;
  CHECK(Philox4x32::bijection({ 0, 0, 0, 0 }, { 0, 0 }) ==
        B{ 0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8 });
  CHECK(Philox4x32::bijection({ 0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff },
                              { 0xffffffff, 0xffffffff }) ==
        B{ 0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd });
  CHECK(Philox4x32::bijection({ 0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344 },
                              { 0xa4093822, 0x299f31d0 }) ==
        B{ 0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1 });

  Philox4x32 g(0);
  CHECK(g() == 0x6627e8d5u);
  CHECK(g() == 0xe169c58du);
}

TEST_CASE("streams are deterministic and distinct")
{
  Philox4x32 a = make_stream(7, 1, 2, StreamPurpose::noise);
  Philox4x32 b = make_stream(7, 1, 2, StreamPurpose::noise);
  for (int i = 0; i < 100; ++i)
    CHECK(a() == b());
  std::set<std::uint64_t> keys;
  for (std::uint64_t seed : { 1u, 2u })
    for (std::uint64_t slot = 0; slot < 4; ++slot)
      for (std::uint64_t rep = 0; rep < 50; ++rep)
        for (auto p : { StreamPurpose::covariates, StreamPurpose::noise })
          keys.insert(stream_key(seed, slot, rep, p));
  CHECK(keys.size() == 2 * 4 * 50 * 2);

  Philox4x32 u(123);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("design generation")
{
  const SimDesign zero = make_design("reference_zero_noise");
  const Sample s = zero.generate(500, 3);
  for (std::size_t i = 0; i < s.n(); ++i) {
    CHECK(s.y()[i] == doctest::Approx(zero.m(s.row(i))).epsilon(1e-14));
    for (std::size_t l = 0; l < 2; ++l) {
      CHECK(s.x(i, l) >= 0.0);
      CHECK(s.x(i, l) <= 1.0);
    }
  }
  const Sample again = zero.generate(500, 3);
  CHECK(std::equal(s.xs().begin(), s.xs().end(), again.xs().begin()));

  // noise is independent of covariates: same covariates with or without noise
  const SimDesign noisy = make_design("reference");
  const Sample t = noisy.generate(500, 3);
  CHECK(std::equal(s.xs().begin(), s.xs().end(), t.xs().begin()));
  for (std::size_t i = 0; i < t.n(); ++i)
    CHECK(std::abs(t.y()[i] - noisy.m(t.row(i))) <= 0.5);
}

TEST_CASE("law of large numbers")
{
  const SimDesign design = make_design("polynomial_x");
  const Sample s = design.generate(100000, 17);
  double mean_x = 0.0, mean_noise = 0.0, var_noise = 0.0;
  for (std::size_t i = 0; i < s.n(); ++i) {
    mean_x += s.x(i, 0);
    const double e = s.y()[i] - design.m(s.row(i));
    mean_noise += e;
    var_noise += e * e;
  }
  mean_x /= 1e5;
  mean_noise /= 1e5;
  var_noise /= 1e5;
  // E X = 1/2 + tilt/6 for the tilted law
  CHECK(mean_x == doctest::Approx(0.5 + 0.3 / 6.0).epsilon(0.01));
  CHECK(std::abs(mean_noise) < 0.01);
  CHECK(var_noise == doctest::Approx(design.noise_variance()).epsilon(0.02));
}

TEST_CASE("axis law quantile inverts the cdf")
{
  const AxisLaw law{ -0.4 };
  for (double u : { 0.0, 0.1, 0.5, 0.9, 1.0 }) {
    const double x = law.quantile(u);
    const double cdf = x - 0.4 * (x * x - x);
    CHECK(cdf == doctest::Approx(u).epsilon(1e-12));
  }
  CHECK(AxisLaw{}.quantile(0.3) == doctest::Approx(0.3));
}

TEST_CASE("design validation")
{
  CHECK_THROWS_AS(make_design("nope"), std::invalid_argument);
  for (const auto& name : design_names())
    CHECK_NOTHROW(make_design(name));
  const auto f = [](double) { return 0.0; };
  CHECK_THROWS_AS(SimDesign("bad", 0.0, { f, f }, { {}, {} }, 0.5, { 0.1, 0.9 }, { 0.05, 0.85 }),
                  std::invalid_argument);
}

TEST_CASE("quantiles")
{
  const Quantiles q = quantiles({ 4.0, 1.0, 3.0, 2.0 });
  CHECK(q.q25 == doctest::Approx(1.75));
  CHECK(q.median == doctest::Approx(2.5));
  CHECK(q.q75 == doctest::Approx(3.25));
  CHECK(quantiles({ 5.0 }).median == 5.0);
  CHECK_THROWS_AS(quantiles({}), std::invalid_argument);
}

TEST_CASE("summaries are recomputable from records")
{
  const SimDesign design = make_design("reference");
  ExperimentSettings settings;
  settings.grid_points = 32;
  MCReport report = run_coverage(design, settings, { 200, 400 }, 4, 0.5, 9);
  const auto original = report.summaries;
  summarize(report);
  REQUIRE(original.size() == report.summaries.size());
  for (std::size_t i = 0; i < original.size(); ++i) {
    CHECK(original[i].t_plus->median == report.summaries[i].t_plus->median);
    CHECK(original[i].coverage_upper == report.summaries[i].coverage_upper);
    CHECK(original[i].reps == 4);
  }
  for (const auto& r : report.records) {
    CHECK(r.cover_lower <= r.cover_unit);
    CHECK(r.cover_unit <= r.cover_upper);
  }
  CHECK(report.sigma.size() == 1);
  CHECK(report.target == report.sigma[0]);
  CHECK_THROWS_AS(run_coverage(design, settings, { 200 }, 2, 1.0, 9), std::invalid_argument);
  CHECK_THROWS_AS(run_coverage(design, settings, { 200 }, 2, 0.0, 9), std::invalid_argument);
}

TEST_CASE("parallel_for visits each index once")
{
  std::vector<std::atomic<int>> hits(257);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i].fetch_add(1); });
  for (auto& h : hits)
    CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 5)
                                   throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("results do not depend on the thread count")
{
  const SimDesign design = make_design("reference");
  ExperimentSettings one;
  one.grid_points = 32;
  ExperimentSettings four = one;
  four.threads = 4;
  const MCReport a = run_theorem1(design, one, { 150, 300 }, 3, 5);
  const MCReport b = run_theorem1(design, four, { 150, 300 }, 3, 5);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].stream == b.records[i].stream);
    CHECK(a.records[i].t_plus == b.records[i].t_plus);
    CHECK(a.records[i].sup_error == b.records[i].sup_error);
  }
}

TEST_CASE("theorem2 requires equal bandwidths")
{
  const SimDesign design = make_design("reference");
  ExperimentSettings s;
  s.grid_points = 8;
  s.constants.c_h = 0.0;
  CHECK_THROWS_AS(run_theorem2(design, s, { 100 }, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(run_theorem1(design, ExperimentSettings{}, {}, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(run_theorem1(design, ExperimentSettings{}, { 100 }, 0, 1), std::invalid_argument);
}

TEST_CASE("check_report flags trends")
{
  MCReport r;
  r.experiment = Experiment::coupling;
  r.n_list = { 1, 2, 3 };
  for (std::size_t k = 0; k < 3; ++k) {
    ReplicationRecord rec;
    rec.n = r.n_list[k];
    rec.sup_error = 3.0 - static_cast<double>(k);
    r.records.push_back(rec);
  }
  summarize(r);
  CHECK(check_report(r).front().pass);
  r.records[2].sup_error = 10.0;
  summarize(r);
  CHECK_FALSE(check_report(r).front().pass);

  MCReport bench;
  bench.experiment = Experiment::dimensionality;
  bench.n_list = { 10 };
  for (int k = 0; k < 10; ++k) {
    ReplicationRecord rec;
    rec.n = 10;
    rec.sup_error = 1.0;
    rec.sup_error_ref = k < 7 ? 2.0 : 0.5;
    bench.records.push_back(rec);
  }
  summarize(bench);
  CHECK(bench.summaries[0].win_fraction == doctest::Approx(0.7));
  CHECK(check_report(bench).front().pass);
  CHECK_FALSE(check_report(bench, { 0.35, 0.9, 0.71 }).front().pass);
}
