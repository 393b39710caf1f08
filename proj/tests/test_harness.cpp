#include <doctest.h>

#include <cmath>
#include <random>

#include "saps/harness.hpp"

using namespace saps;

namespace {

ExperimentConfig small_grid() {
  ExperimentConfig c = default_experiment();
  for (auto& cls : c.classes) cls.sequences = 2;
  c.targets = {8, 1, 0.125};
  c.qps = {27};
  c.frames = 120;
  return c;
}

}  // namespace

TEST_CASE("speed error") {
  CHECK(speed_error({{1.0, 1.0}, {4.0, 4.0}}) == 0.0);
  CHECK(speed_error({{1.1, 1.0}, {0.9, 1.0}}) == doctest::Approx(0.10));
  CHECK(speed_error({{2.0, 1.0}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(speed_error({}), ContractViolation);
  CHECK_THROWS_AS(speed_error({{1.0, 0.0}}), ContractViolation);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> v(0.1, 10.0), k(0.01, 100.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<std::pair<double, double>> runs, scaled;
    const double s = k(rng);
    for (int j = 0; j < 10; ++j) {
      const double real = v(rng), target = v(rng);
      runs.emplace_back(real, target);
      scaled.emplace_back(real * s, target * s);
    }
    CHECK(speed_error(scaled) == doctest::Approx(speed_error(runs)).epsilon(1e-12));
  }
}

TEST_CASE("reachability against the table ends") {
  const auto t = default_table();
  // 1920x1080 at 16 fps is 33177.6 kpps, above preset 12.
  CHECK_FALSE(reachability(1920, 1080, 16, t, QpContext(17)));
  // 640x360 at 0.125 fps is 28.8 kpps, below preset 1.
  CHECK_FALSE(reachability(640, 360, 0.125, t, QpContext(17)));
  CHECK(reachability(640, 360, 1.0, t, QpContext(17)));
  CHECK(reachability(640, 360, 62.6 / 230.4, t, QpContext(17)));
  CHECK(reachability(640, 360, 24463 / 230.4, t, QpContext(17)));
}

TEST_CASE("reachable range spans two orders of magnitude") {
  const auto t = default_table();
  CHECK(t.at(12) / t.at(1) == doctest::Approx(24463 / 62.6));
  CHECK(t.at(12) / t.at(1) > 100.0);
}

TEST_CASE("sequence content is shared across QPs and targets") {
  const auto c = default_experiment();
  const auto a = make_sequence(c, c.classes[0], 3, 23);
  const auto b = make_sequence(c, c.classes[0], 3, 37);
  CHECK(a.sequence_scale == b.sequence_scale);
  CHECK(a.noise.seed == b.noise.seed);
  CHECK(a.sequence_scale >= 0.5);
  CHECK(a.sequence_scale <= 2.0);
  const auto other = make_sequence(c, c.classes[0], 4, 23);
  CHECK(other.noise.seed != a.noise.seed);
}

TEST_CASE("grid aggregates cells, classes and overall averages") {
  const auto c = small_grid();
  const auto r = run_grid(c);
  REQUIRE(r.cells.size() == 9);
  REQUIRE(r.runs.size() == 3 * 3 * 2);

  std::vector<double> reachable_cells;
  std::vector<std::pair<double, double>> reachable_runs;
  std::size_t cursor = 0;
  for (const auto& cell : r.cells) {
    std::vector<std::pair<double, double>> pairs;
    for (int k = 0; k < 2; ++k, ++cursor) {
      const auto& run = r.runs[cursor];
      CHECK(run.class_name == cell.class_name);
      CHECK(run.target_fps == cell.target_fps);
      CHECK(run.ok());
      pairs.emplace_back(run.real_fps, run.target_fps);
    }
    REQUIRE(cell.epsilon.has_value());
    CHECK(*cell.epsilon == doctest::Approx(speed_error(pairs)).epsilon(1e-15));
    if (cell.reachable) {
      reachable_cells.push_back(*cell.epsilon);
      reachable_runs.insert(reachable_runs.end(), pairs.begin(), pairs.end());
    }
  }
  // A2 at 8 fps (16589 kpps) is reachable at QP 27; A4 at 0.125 fps is not.
  CHECK(r.cells[0].reachable);
  CHECK_FALSE(r.cells[8].reachable);

  double mean = 0.0;
  for (double e : reachable_cells) mean += e;
  mean /= static_cast<double>(reachable_cells.size());
  REQUIRE(r.overall_cell_mean.has_value());
  CHECK(*r.overall_cell_mean == doctest::Approx(mean).epsilon(1e-15));
  CHECK(*r.overall_run_mean == doctest::Approx(speed_error(reachable_runs)).epsilon(1e-15));
}

TEST_CASE("grid results do not depend on worker count") {
  auto c = small_grid();
  const auto serial = run_grid(c);
  c.jobs = 4;
  const auto parallel = run_grid(c);
  REQUIRE(serial.runs.size() == parallel.runs.size());
  for (std::size_t i = 0; i < serial.runs.size(); ++i) {
    CHECK(serial.runs[i].real_fps == parallel.runs[i].real_fps);
  }
  CHECK(*serial.overall_cell_mean == *parallel.overall_cell_mean);
}

TEST_CASE("a failing run is recorded without aborting the grid") {
  auto c = small_grid();
  c.mode = "trace";
  c.traces = {SAPS_TEST_DATA "/small_trace.csv"};
  c.targets = {20.0, 5.0};
  c.qps = {17};
  c.buffer_size = 4;
  const auto r = run_grid(c);
  REQUIRE(r.cells.size() == 2);
  CHECK(r.cells[0].class_name == "640x360");
  CHECK(r.cells[0].run_count == 1);
  CHECK(r.runs[0].ok());

  c.traces.push_back(SAPS_TEST_DATA "/missing.csv");
  CHECK_THROWS(run_grid(c));
}

TEST_CASE("config validation") {
  auto c = default_experiment();
  CHECK_NOTHROW(c.validate());
  c.targets.clear();
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c = default_experiment();
  c.qps = {0};
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c = default_experiment();
  c.mode = "bogus";
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c = default_experiment();
  c.classes[0].width = 0;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
}

TEST_CASE("estimator validation series") {
  ValidationSetup v;
  v.constant_preset = 6;
  v.frames = 160;
  v.buffer_size = 16;

  SUBCASE("converges to the real speed on a clean run") {
    const auto s = validate_estimator(v);
    REQUIRE(s.size() == 160);
    CHECK(s.back().ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(s[31].ratio - 1.0) <= 0.15);
    // First completion is the worst point; the error shrinks over the first buffer.
    for (std::size_t i = 1; i < 16; ++i) {
      CHECK(std::fabs(s[i].ratio - 1.0) <= std::fabs(s[i - 1].ratio - 1.0));
    }
    for (const auto& p : s) CHECK(p.buffer_boundary == (p.completed % 16 == 0));
  }
  SUBCASE("unit buffer is exact everywhere") {
    v.buffer_size = 1;
    for (const auto& p : validate_estimator(v)) CHECK(p.ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("noisy run improves over the first two buffers on average") {
    v.noise_sigma = 0.2;
    v.seed = 77;
    const auto s = validate_estimator(v);
    auto mean_err = [&](std::size_t from, std::size_t to) {
      double e = 0.0;
      for (std::size_t i = from; i < to; ++i) e += std::fabs(s[i].ratio - 1.0);
      return e / static_cast<double>(to - from);
    };
    CHECK(mean_err(0, 8) > mean_err(8, 16));
    CHECK(mean_err(0, 16) > mean_err(16, 32));
  }
  SUBCASE("closed-loop series") {
    v.constant_preset.reset();
    v.target_fps = 2.0;
    const auto s = validate_estimator(v);
    CHECK(s.size() == 160);
  }
  SUBCASE("bad constant preset") {
    v.constant_preset = 13;
    CHECK_THROWS_AS(validate_estimator(v), ContractViolation);
  }
}
