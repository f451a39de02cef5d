#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "sgidla/errors.hpp"
#include "sgidla/experiments.hpp"
#include "sgidla/parallel.hpp"
#include "sgidla/potential.hpp"
#include "sgidla/walker.hpp"

using namespace sgidla;

namespace {

constexpr GraphFamily kSg2 = GraphFamily::GasketTwoSided;

bool within_3se(double estimate, double se, double exact) {
  return std::abs(estimate - exact) <= 3.0 * se + 1e-12;
}

}  // namespace

TEST_CASE("stream seeds") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (std::uint64_t i = 0; i < 256; ++i) seen.insert(derive_stream_seed(s, i));
  }
  CHECK(seen.size() == 4 * 256);

  RngStream a(42, 3);
  RngStream b(42, 3);
  RngStream c(42, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs |= x != c.next();
  }
  CHECK(differs);
}

TEST_CASE("bounded draws are uniform") {
  RngStream rng(5, 0);
  std::vector<double> counts(6, 0.0);
  const std::size_t draws = 60'000;
  for (std::size_t i = 0; i < draws; ++i) counts[rng.below(6)] += 1.0;
  const std::vector<double> expected(6, draws / 6.0);
  CHECK(chi_square_from_bins(counts, expected, 0, 5.0).p_value > 0.001);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("one step from the origin is uniform over its neighbors") {
  RngStream rng(9, 1);
  std::vector<double> counts(4, 0.0);
  const auto nbrs = neighbors(kSg2, kOrigin);
  for (int i = 0; i < 20'000; ++i) {
    const WalkOutcome w = walk_until(rng, kSg2, kOrigin, [](const Vertex& x) { return x != kOrigin; });
    CHECK(w.steps == 1);
    for (std::size_t j = 0; j < 4; ++j) {
      if (nbrs[j] == w.end) counts[j] += 1.0;
    }
  }
  const std::vector<double> expected(4, 5000.0);
  CHECK(chi_square_from_bins(counts, expected, 0, 5.0).p_value > 0.001);
}

TEST_CASE("walks are reproducible and respect the cap") {
  auto trajectory = [](std::uint64_t stream) {
    RngStream rng(77, stream);
    std::vector<Vertex> path;
    walk_until(rng, kSg2, kOrigin, [&](const Vertex& x) {
      path.push_back(x);
      return path.size() > 500;
    });
    return path;
  };
  CHECK(trajectory(0) == trajectory(0));
  CHECK(trajectory(0) != trajectory(1));

  RngStream rng(1, 0);
  const WalkOutcome capped = walk_until(rng, kSg2, kOrigin, [](const Vertex&) { return false; }, 10);
  CHECK(capped.reason == StopReason::StepCap);
  CHECK(capped.steps == 10);

  const WalkOutcome at_start = walk_until(rng, kSg2, kOrigin, [](const Vertex&) { return true; });
  CHECK(at_start.steps == 0);
  CHECK(at_start.reason == StopReason::HitTarget);
}

TEST_CASE("Monte Carlo exit times agree with the exact solver") {
  const ExitTimeEstimate one = mc_exit_time(kSg2, kOrigin, 1, 50, 3);
  CHECK(one.mean == 1.0);
  CHECK(one.std_error == 0.0);

  const ExitTimeEstimate two = mc_exit_time(kSg2, kOrigin, 2, 100'000, 3);
  CHECK(within_3se(two.mean, two.std_error, 3.5));
  CHECK(two.cap_hits == 0);

  for (int k = 2; k <= 5; ++k) {
    const int n = 1 << k;
    const ExitTimeEstimate e = mc_exit_time(kSg2, kOrigin, n, 20'000, 100 + k);
    const double exact = expected_exit_time(ball(kSg2, kOrigin, n)).at(kOrigin);
    CHECK_MESSAGE(within_3se(e.mean, e.std_error, exact), "n = " << n);
  }

  CHECK_THROWS_AS(mc_exit_time(kSg2, kOrigin, 16, 200, 8, 5), StepCapError);
}

TEST_CASE("Monte Carlo hitting probabilities") {
  const Ball b2 = ball(kSg2, kOrigin, 2);
  const std::vector<Vertex> origin{kOrigin};
  const HitEstimate h = mc_hit_before_exit({1, 0}, origin, b2, 50'000, 4);
  CHECK(within_3se(h.p_hat, h.std_error, 1.0 / 3.0));

  const Ball b8 = ball(kSg2, kOrigin, 8);
  const HitEstimate all = mc_hit_before_exit({2, 1}, b8.interior, b8, 100, 4);
  CHECK(all.p_hat == 1.0);

  const std::vector<Vertex> target{{3, 1}};
  const HitEstimate far = mc_hit_before_exit({-2, -1}, target, b8, 40'000, 6);
  CHECK(within_3se(far.p_hat, far.std_error, hitting_probability(b8, {3, 1}, {-2, -1})));
}

TEST_CASE("parallel_for visits every index once and forwards exceptions") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) CHECK(h.load() == 1);

  CHECK_THROWS_AS(parallel_for(50, 3,
                               [](std::size_t i) {
                                 if (i == 17) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}
