#include <doctest.h>

#include <cmath>

#include "qkern/hmm.hpp"
#include "support.hpp"

using namespace qkern;
using namespace qkern::hmm;

namespace {

ClassicalHmm sticky_emitter(char symbol) {
  // Identity transition; every state emits `symbol` with certainty.
  const std::vector<std::vector<double>> a{{1, 0}, {0, 1}};
  const std::vector<std::vector<double>> b = symbol == '0' ? std::vector<std::vector<double>>{{1, 0}, {1, 0}}
                                                           : std::vector<std::vector<double>>{{0, 1}, {0, 1}};
  return ClassicalHmm::from_rows("01", a, b, {0.5, 0.5});
}

}  // namespace

TEST_CASE("observable_operator: market table column and stochasticity") {
  const auto m = market4();
  const auto t0 = observable_operator(m, '0');
  const std::vector<double> row0{0.50, 0.10, 0.15, 0.25};
  for (std::size_t j = 0; j < 4; ++j) CHECK(t0(j, 0) == doctest::Approx(0.8 * row0[j]).epsilon(1e-15));

  const auto t1 = observable_operator(m, '1');
  for (std::size_t i = 0; i < 4; ++i) {
    double col = 0.0;
    for (std::size_t j = 0; j < 4; ++j) col += t0(j, i) + t1(j, i);
    CHECK(col == doctest::Approx(1.0).epsilon(1e-15));
  }

  const auto id = observable_operator(sticky_emitter('0'), '0');
  CHECK(id(0, 0) == 1.0);
  CHECK(id(1, 1) == 1.0);
  CHECK(id(0, 1) == 0.0);
  CHECK(id(1, 0) == 0.0);
  CHECK_THROWS_AS(observable_operator(m, '2'), std::invalid_argument);
}

TEST_CASE("sequence_probability against an independent forward pass") {
  const auto m = market4();
  CHECK(sequence_probability(m, "") == 1.0);
  CHECK(sequence_probability(m, "0") == doctest::Approx(0.5).epsilon(1e-15));
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto y = support::random_sequence("01", 1 + trial % 10, rng);
    CHECK(std::abs(sequence_probability(m, y) - support::market_forward(y)) < 1e-14);
  }
}

TEST_CASE("enumerate_distribution") {
  const auto m = market4();
  const auto d0 = enumerate_distribution(m, 0);
  CHECK(d0.probs.size() == 1);
  CHECK(d0.at("") == 1.0);

  const auto d1 = enumerate_distribution(m, 1);
  CHECK(d1.at("0") == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d1.at("1") == doctest::Approx(0.5).epsilon(1e-15));

  const auto d6 = enumerate_distribution(m, 6);
  CHECK(d6.probs.size() == 64);
  CHECK(std::abs(d6.total() - 1.0) < 1e-12);
  for (const auto& [y, p] : d6.probs) CHECK(std::abs(p - support::market_forward(y)) < 1e-14);
  // Persistent runs are the most likely length-6 outputs.
  double best = 0.0;
  std::string mode;
  for (const auto& [y, p] : d6.probs)
    if (p > best) best = p, mode = y;
  CHECK((mode == "000000" || mode == "111111"));
  CHECK(d6.at("000000") == doctest::Approx(d6.at("111111")).epsilon(1e-12));

  CHECK_THROWS_AS(enumerate_distribution(m, 21), EnumerationCapError);
}

TEST_CASE("sample: empirical distribution, determinism, deterministic model") {
  const auto m = market4();
  Rng rng(22);
  std::map<std::string, double> counts;
  const int shots = 100'000;
  for (int s = 0; s < shots; ++s) counts[sample(m, 4, rng)] += 1.0 / shots;
  const auto exact = enumerate_distribution(m, 4);
  double tv = 0.0;
  for (const auto& [y, p] : exact.probs) tv = std::max(tv, std::abs(p - counts[y]));
  CHECK(tv <= 0.02);

  Rng a(99), b(99);
  CHECK(sample(m, 20, a) == sample(m, 20, b));

  Rng r(1);
  CHECK(sample(sticky_emitter('1'), 4, r) == "1111");
}

TEST_CASE("belief_update") {
  const auto m = market4();
  const auto [post, p] = belief_update(m, {0.25, 0.25, 0.25, 0.25}, '0');
  CHECK(p == doctest::Approx(0.5).epsilon(1e-15));
  const auto [post0, p0] = belief_update(m, {1, 0, 0, 0}, '0');
  CHECK(p0 == doctest::Approx(0.8).epsilon(1e-15));

  Rng rng(23);
  BeliefVector b{0.25, 0.25, 0.25, 0.25};
  for (int step = 0; step < 50; ++step) {
    const char a = support::random_sequence("01", 1, rng)[0];
    b = belief_update(m, b, a).first;
    double s = 0.0;
    for (double v : b) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(belief_update(sticky_emitter('0'), {0.5, 0.5}, '1'), ImpossibleSequenceError);
}

TEST_CASE("feature_map") {
  const auto m = market4();
  CHECK(feature_map(m, "") == m.initial());
  const auto f = feature_map(m, "0");
  CHECK(f[0] + f[1] + f[2] + f[3] == doctest::Approx(0.5).epsilon(1e-15));
  Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const auto y = support::random_sequence("01", trial % 12, rng);
    const auto v = feature_map(m, y);
    double s = 0.0;
    for (double x : v) s += x;
    CHECK(s == doctest::Approx(sequence_probability(m, y)).epsilon(1e-13));
  }
}

TEST_CASE("model validation and JSON round trip") {
  CHECK_THROWS_AS(ClassicalHmm::from_rows("01", {{0.5, 0.6}, {0.5, 0.5}}, {{1, 0}, {0, 1}}, {0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ClassicalHmm::from_rows("01", {{0.5, 0.5}, {0.5, 0.5}}, {{1, 0}, {0, 1}}, {0.7, 0.7}),
                  std::invalid_argument);

  const auto m = market4();
  const auto j = to_json(m);
  CHECK(j.at("transition").at(0).at(3).get<double>() == 0.25);
  CHECK(j.at("emission").at(2).at(0).get<double>() == 0.4);
  const auto back = from_json(j);
  for (const auto& y : support::all_sequences("01", 5))
    CHECK(sequence_probability(back, y) == sequence_probability(m, y));
}
