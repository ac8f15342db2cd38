#include <cmath>

#include "ciskip/replay.hpp"
#include "doctest.h"

using namespace ciskip;

namespace {

Transition tagged(double reward) {
  Transition t;
  t.reward = reward;
  t.terminal = true;
  return t;
}

// Buffer of three items with priorities [1, 1, 2].
PrioritizedBuffer one_one_two(double alpha) {
  PrioritizedBuffer buf(10, alpha, 0.5);
  for (int i = 0; i < 3; ++i) buf.push(tagged(i));
  buf.update_priorities({0, 1, 2}, {0.5, 0.5, 1.5});
  return buf;
}

std::vector<double> frequencies(const PrioritizedBuffer& buf, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> counts(buf.size(), 0.0);
  for (std::size_t d = 0; d < draws; ++d) counts[buf.sample(1, 0.4, rng).indices[0]] += 1;
  for (auto& c : counts) c /= static_cast<double>(draws);
  return counts;
}

}  // namespace

TEST_CASE("push assigns the maximum live priority") {
  PrioritizedBuffer buf(2, 0.6, 0.01);
  buf.push(tagged(1));
  CHECK(buf.size() == 1);
  CHECK(buf.priority(0) == 1.0);
  buf.update_priorities({0}, {7.99});
  buf.push(tagged(2));
  CHECK(buf.priority(1) == doctest::Approx(8.0));
}

TEST_CASE("ring eviction drops the oldest") {
  PrioritizedBuffer buf(2, 0.6, 0.01);
  buf.push(tagged(1));
  buf.push(tagged(2));
  buf.push(tagged(3));
  CHECK(buf.size() == 2);
  std::vector<double> rewards = {buf.at(0).reward, buf.at(1).reward};
  std::sort(rewards.begin(), rewards.end());
  CHECK(rewards == std::vector<double>{2, 3});
}

TEST_CASE("priority refresh uses |delta| plus the floor") {
  PrioritizedBuffer buf(4, 0.6, 0.01);
  buf.push(tagged(0));
  buf.push(tagged(0));
  buf.update_priorities({0, 1}, {0.0, -0.5});
  CHECK(buf.priority(0) == doctest::Approx(0.01));
  CHECK(buf.priority(1) == doctest::Approx(0.51));
  CHECK_THROWS_AS(buf.update_priorities({5}, {0.1}), Error);
}

TEST_CASE("proportional sampling frequencies") {
  const auto buf = one_one_two(1.0);
  CHECK(buf.probability(2) == doctest::Approx(0.5));
  const auto f = frequencies(buf, 100000, 3);
  const double want[] = {0.25, 0.25, 0.5};
  for (int i = 0; i < 3; ++i) {
    const double sigma = std::sqrt(want[i] * (1 - want[i]) / 100000.0);
    CHECK(std::abs(f[i] - want[i]) < 3 * sigma);
    CHECK(std::abs(f[i] - want[i]) < 0.01);
  }
}

TEST_CASE("alpha 0 samples uniformly") {
  const auto buf = one_one_two(0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(buf.probability(i) == doctest::Approx(1.0 / 3));
  const auto f = frequencies(buf, 30000, 4);
  double chi2 = 0;
  for (double p : f) chi2 += 30000.0 * (p - 1.0 / 3) * (p - 1.0 / 3) / (1.0 / 3);
  CHECK(chi2 < 13.82);  // 0.001 critical value, 2 degrees of freedom
}

TEST_CASE("importance weights") {
  const auto buf = one_one_two(1.0);
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const auto flat = buf.sample(3, 0.0, rng);
    for (double w : flat.weights) CHECK(w == 1.0);

    const auto s = buf.sample(3, 1.0, rng);
    double top = 0;
    bool mixed = false;
    for (std::size_t j = 0; j < s.indices.size(); ++j) {
      top = std::max(top, s.weights[j]);
      mixed |= s.indices[j] != 2;
    }
    CHECK(top == 1.0);
    // (N P(i))^-1 normalised by the batch max: with a p=1 item in the batch,
    // p=1 items weigh 1 and the p=2 item weighs 0.5.
    if (mixed)
      for (std::size_t j = 0; j < s.indices.size(); ++j)
        CHECK(s.weights[j] == doctest::Approx(s.indices[j] == 2 ? 0.5 : 1.0));
  }
}

TEST_CASE("refreshed priorities shift the sampling distribution") {
  auto buf = one_one_two(1.0);
  buf.update_priorities({0}, {5.5});  // priorities [6, 1, 2]
  const auto f = frequencies(buf, 100000, 5);
  CHECK(f[0] == doctest::Approx(6.0 / 9).epsilon(0.02));
  CHECK(f[1] == doctest::Approx(1.0 / 9).epsilon(0.05));
}

TEST_CASE("sampling an underfilled buffer fails") {
  PrioritizedBuffer buf(4, 0.6, 0.01);
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(buf.sample(1, 0.4, rng), Error);
}
