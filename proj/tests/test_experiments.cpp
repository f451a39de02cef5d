#include <doctest.h>

#include <cmath>
#include <map>
#include <string>

#include "sgidla/errors.hpp"
#include "sgidla/experiments.hpp"

using namespace sgidla;
using doctest::Approx;

TEST_CASE("log-log fit recovers a power law") {
  const std::vector<double> x{1, 2, 4, 8, 16};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v * v);
  const LogLogFit fit = fit_log_log(x, y);
  CHECK(fit.slope == Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(fit.intercept) == Approx(3.0).epsilon(1e-12));
  for (double r : fit.residuals) CHECK(std::abs(r) < 1e-12);
  CHECK_THROWS_AS(fit_log_log({1.0}, {2.0}), DomainError);
}

TEST_CASE("volume scaling") {
  const ScalingReport rep = scaling_fit(ScalingQuantity::Volume, 1, 8);
  REQUIRE(rep.values.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    const int k = rep.levels[i];
    CHECK(rep.radii[i] == (1 << k) + 1);
    CHECK(rep.values[i] == std::pow(3.0, k + 1) + 2.0);
    CHECK(rep.std_errors[i] == 0.0);
  }
  CHECK(std::abs(rep.fitted_exponent - constants::alpha) / constants::alpha < 0.05);
  CHECK(rep.reference_exponent == Approx(constants::alpha));
  CHECK(rep.ratios.size() == 7);
}

TEST_CASE("exit-time and Green-diagonal ratios") {
  const ScalingReport exit = scaling_fit(ScalingQuantity::ExitTime, 3, 5);
  for (double r : exit.ratios) CHECK(std::abs(r - 5.0) / 5.0 < 0.02);
  CHECK(exit.values[0] == Approx(72.875).epsilon(1e-11));

  const ScalingReport green = scaling_fit(ScalingQuantity::GreenDiagonal, 3, 5);
  for (double r : green.ratios) CHECK(std::abs(r - 5.0 / 3.0) / (5.0 / 3.0) < 0.05);
  CHECK(green.reference_exponent == Approx(constants::beta - constants::alpha));

  const ScalingReport res = scaling_fit(ScalingQuantity::Resistance, 1, 6);
  CHECK(res.values[0] == Approx(0.375));
  for (std::size_t i = 1; i < res.values.size(); ++i) CHECK(res.values[i] > 0.0);
  CHECK(res.ratios.back() == Approx(5.0 / 3.0).epsilon(0.1));
}

TEST_CASE("Monte Carlo exit-time scaling") {
  ScalingOptions opt;
  opt.mc_reps = 4000;
  opt.seed = 12;
  const ScalingReport mc = scaling_fit(ScalingQuantity::ExitTime, 1, 4, opt);
  const ScalingReport exact = scaling_fit(ScalingQuantity::ExitTime, 1, 4);
  for (std::size_t i = 0; i < mc.values.size(); ++i) {
    CHECK(mc.std_errors[i] > 0.0);
    CHECK(std::abs(mc.values[i] - exact.values[i]) <= 3.0 * mc.std_errors[i]);
  }
  const ScalingReport again = scaling_fit(ScalingQuantity::ExitTime, 1, 4, opt);
  CHECK(again.values == mc.values);
}

TEST_CASE("quantity names") {
  CHECK(parse_scaling_quantity("green-diagonal") == ScalingQuantity::GreenDiagonal);
  CHECK(to_string(ScalingQuantity::ExitTime) == "exit-time");
  CHECK_THROWS_AS(parse_scaling_quantity("entropy"), DomainError);
}

TEST_CASE("shape experiment") {
  const ShapeReport trivial = shape_experiment(1, 0.5, 1, 1);
  CHECK(trivial.inner_ok_fraction == 1.0);

  const ShapeReport rep = shape_experiment(16, 0.25, 10, 2);
  CHECK(rep.particles == 211);
  CHECK(rep.inner_target == 12);
  CHECK(rep.outer_target == 20);
  CHECK(rep.radii.size() == 10);
  CHECK(rep.failed == 0);
  CHECK(rep.inner_ok_fraction >= 0.9);
  CHECK(rep.outer_ok_fraction >= 0.9);

  const ShapeReport again = shape_experiment(16, 0.25, 10, 2);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(again.radii[i].inner == rep.radii[i].inner);
    CHECK(again.radii[i].outer == rep.radii[i].outer);
  }
}

TEST_CASE("stopped IDLA keeps most of the mass inside the ball") {
  const FractionStats f = lb_fraction(32, 8, 1);
  CHECK(f.ball_volume == 665);
  CHECK(f.samples.size() == 8);
  CHECK(f.min <= f.mean);
  CHECK(f.mean <= f.max);
  CHECK(f.max <= 1.0);
  CHECK(f.mean >= 0.9);
}

TEST_CASE("annulus absorption") {
  CHECK_THROWS_AS(annulus_absorption(32, 3, 0.1, 1, 1), DomainError);
  CHECK_NOTHROW(annulus_absorption(32, 4, 0.1, 1, 1));
  CHECK_THROWS_AS(annulus_absorption(32, 244, 0.1, 1, 1), DomainError);

  const AbsorptionReport rep = annulus_absorption(32, 16, 0.1, 20, 4);
  CHECK(rep.pause_radius == 32 + 6);
  CHECK(rep.absorbed.size() == 20);
  for (std::size_t a : rep.absorbed) CHECK(a <= 16);
  CHECK(rep.success_fraction >= 0.0);
  CHECK(rep.success_fraction <= 1.0);
}

TEST_CASE("Green infimum profile") {
  const GreenInfProfile p = green_inf_profile({3, 4, 5}, 0.5);
  REQUIRE(p.rows.size() == 3);
  CHECK(p.floor > 0.0);
  for (const GreenInfRow& row : p.rows) {
    CHECK(row.r == (1 << row.k));
    CHECK(row.inner_radius == row.r / 2);
    CHECK(row.normalized >= p.floor);
    CHECK(row.normalized == Approx(row.infimum / std::pow(row.r, constants::beta - constants::alpha)));
  }
}

TEST_CASE("chi-square goodness of fit") {
  const ChiSquareResult r = chi_square_from_bins({10, 20, 30}, {20, 20, 20}, 0, 5.0);
  CHECK(r.statistic == Approx(10.0));
  CHECK(r.dof == 2);
  CHECK(r.p_value == Approx(std::exp(-5.0)).epsilon(1e-12));

  // The two small bins are pooled into one of expected count 6.
  const ChiSquareResult pooled = chi_square_from_bins({50, 50, 3, 3}, {47, 47, 3, 3}, 0, 5.0);
  CHECK(pooled.bins == 3);
  CHECK(pooled.dof == 2);

  const ChiSquareResult outside = chi_square_from_bins({10, 10}, {10, 10}, 1, 5.0);
  CHECK(outside.p_value == 0.0);

  std::map<std::string, std::size_t> observed{{"a", 48}, {"b", 52}};
  std::map<std::string, double> expected{{"a", 0.5}, {"b", 0.5}};
  CHECK(chi_square_test(observed, expected, 100).p_value > 0.5);
}

TEST_CASE("abelian property for two particles") {
  const AbelianReport rep = abelian_test(2, 2, 4000, 5);
  CHECK(rep.support_match);
  CHECK(rep.paused_total > 0);
  CHECK(rep.chi2.p_value > 0.01);
  CHECK_THROWS_AS(abelian_test(4, 2, 10, 1), CapacityError);
}
