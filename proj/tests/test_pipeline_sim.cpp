#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "saps/pipeline_sim.hpp"

using namespace saps;

namespace {

SequenceModel clean_model(int w = 640, int h = 360, std::int64_t frames = 300) {
  SequenceModel m;
  m.width = w;
  m.height = h;
  m.n_total = frames;
  m.qp = QpContext(17);
  return m;
}

}  // namespace

TEST_CASE("frame cost is pixel work over pixel rate") {
  const auto m = clean_model();
  CHECK(frame_cost(m, 0, 8) == doctest::Approx(230.4 / 7907.0).epsilon(1e-14));
  CHECK(frame_cost(m, 0, 8) == doctest::Approx(0.02914).epsilon(1e-3));
  CHECK(frame_cost(m, 5, 8) == frame_cost(m, 5, 8));

  auto noisy = m;
  noisy.noise = {0.3, 99};
  for (std::int64_t f = 0; f < 200; ++f) {
    CHECK(frame_cost(noisy, f, 3) == frame_cost(noisy, f, 3));
    CHECK(frame_cost(noisy, f, 12) < frame_cost(noisy, f, 1));
  }
  CHECK_THROWS_AS(frame_cost(m, 0, 0), ContractViolation);
}

TEST_CASE("keyframe spike and QP speed-up") {
  auto m = clean_model();
  m.gop_spike = GopSpike{10, 3.0};
  CHECK(frame_cost(m, 0, 5) == doctest::Approx(3.0 * frame_cost(clean_model(), 0, 5)));
  CHECK(frame_cost(m, 10, 5) == doctest::Approx(3.0 * frame_cost(clean_model(), 10, 5)));
  CHECK(frame_cost(m, 11, 5) == frame_cost(clean_model(), 11, 5));

  auto high_qp = clean_model();
  high_qp.qp = QpContext(37);
  CHECK(frame_cost(high_qp, 0, 5) == doctest::Approx(0.7 * frame_cost(clean_model(), 0, 5)));
}

TEST_CASE("noise multipliers are lognormal around 1") {
  NoiseModel n{0.2, 1234};
  double sum_log = 0.0, sum_sq = 0.0;
  const int count = 20000;
  for (int f = 0; f < count; ++f) {
    const double l = std::log(noise_multiplier(n, f));
    sum_log += l;
    sum_sq += l * l;
  }
  const double mean = sum_log / count;
  const double sd = std::sqrt(sum_sq / count - mean * mean);
  CHECK(std::fabs(mean) < 0.01);
  CHECK(sd == doctest::Approx(0.2).epsilon(0.03));
  CHECK(noise_multiplier({0.0, 5}, 3) == 1.0);
}

TEST_CASE("unit buffer has no overlap") {
  Pipeline pipe(1);
  double sum = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double c = 0.1 * (k + 1);
    pipe.admit(k, 5, c);
    sum += c;
    const auto done = pipe.advance_to_next_completion();
    CHECK(done.frame == k);
    CHECK(done.cumulative_cpu == doctest::Approx(sum).epsilon(1e-15));
  }
}

TEST_CASE("two-frame buffer credits half progress") {
  Pipeline pipe(2);
  pipe.admit(0, 5, 1.0);
  pipe.admit(1, 5, 1.0);
  CHECK(pipe.advance_to_next_completion().cumulative_cpu == doctest::Approx(1.5));
  CHECK(pipe.in_flight().front().progress == doctest::Approx(0.5));
  CHECK_THROWS_AS(Pipeline(0), ContractViolation);
  Pipeline empty(3);
  CHECK_THROWS_AS(empty.advance_to_next_completion(), ContractViolation);
  Pipeline full(1);
  full.admit(0, 1, 1.0);
  CHECK_THROWS_AS(full.admit(1, 1, 1.0), ContractViolation);
}

TEST_CASE("pipeline matches an independent event replay, FIFO and conserving") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> buf(1, 32), frames(1, 200);
  std::uniform_real_distribution<double> cost(0.01, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int b = buf(rng);
    const int n = frames(rng);
    Pipeline pipe(b);
    oracle::PipelineReplay ref{b, std::vector<double>(n), std::vector<double>(n, 0.0)};
    double total = 0.0;
    std::int64_t next_in = 0, next_out = 0;
    while (next_out < n) {
      while (next_in < n && !pipe.full() && (rng() % 3 != 0 || pipe.empty())) {
        const double c = cost(rng);
        pipe.admit(next_in, 1, c);
        ref.cost[next_in] = c;
        ref.tail = ++next_in;
        total += c;
      }
      const auto done = pipe.advance_to_next_completion();
      CHECK(done.frame == next_out);
      ++next_out;
      CHECK(done.cumulative_cpu == doctest::Approx(ref.complete_oldest()).epsilon(1e-12));
    }
    CHECK(std::fabs(pipe.consumed_cpu() - total) <= 1e-9 * total);
  }
}

TEST_CASE("closed loop: settles on the on-budget preset") {
  const auto m = clean_model(1280, 720, 300);
  const double target_fps = pixel_rate_to_fps(default_table().at(5), 1280, 720);
  const auto r = run_encode(m, target_fps, 16);
  REQUIRE(r.frames.size() == 300);
  int at_five = 0;
  for (std::size_t i = 32; i < r.frames.size(); ++i) {
    CHECK(std::abs(r.frames[i].preset - 5) <= 1);
    at_five += r.frames[i].preset == 5;
  }
  CHECK(at_five >= 0.8 * (300 - 32));
  CHECK(std::fabs(r.total_cpu - r.target_seconds) / r.target_seconds <= 0.05);
}

TEST_CASE("closed loop: unreachably slow target pins preset 1") {
  const auto m = clean_model(640, 360, 120);
  const auto r = run_encode(m, 0.01, 8);
  for (const auto& f : r.frames) CHECK(f.preset == 1);
}

TEST_CASE("closed loop: sequence within one buffer keeps the initial preset") {
  const auto m = clean_model(640, 360, 16);
  const auto r = run_encode(m, 3.0, 16);
  for (const auto& f : r.frames) CHECK(f.preset == r.frames.front().preset);
  for (const auto& f : r.frames) CHECK(f.frames_in_at_completion == 16);
}

TEST_CASE("closed loop: log is complete and reproducible") {
  auto m = clean_model(1920, 1080, 200);
  m.noise = {0.2, 42};
  m.sequence_scale = 0.7;
  m.gop_spike = GopSpike{100, 3.0};
  const auto a = run_encode(m, 1.5, 12);
  const auto b = run_encode(m, 1.5, 12);
  REQUIRE(a.frames.size() == b.frames.size());
  double cost_sum = 0.0, prev_t = 0.0;
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    CHECK(a.frames[i].preset == b.frames[i].preset);
    CHECK(a.frames[i].cumulative_cpu == b.frames[i].cumulative_cpu);
    CHECK(a.frames[i].cumulative_cpu >= prev_t);
    prev_t = a.frames[i].cumulative_cpu;
    cost_sum += a.frames[i].cost;
  }
  CHECK(std::fabs(a.total_cpu - cost_sum) <= 1e-9 * cost_sum);
  CHECK(a.real_fps == doctest::Approx(200.0 / a.total_cpu));
}
