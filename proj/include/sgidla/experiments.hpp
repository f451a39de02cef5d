#pragma once

// Experiment drivers. Every report is a pure function of its arguments and
// seed; replicate i always uses RNG stream (seed, i).

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sgidla/aggregation.hpp"
#include "sgidla/graph.hpp"

namespace sgidla {

enum class ScalingQuantity { Volume, ExitTime, GreenDiagonal, Resistance };

std::string_view to_string(ScalingQuantity q);
ScalingQuantity parse_scaling_quantity(std::string_view name);

struct ScalingOptions {
  GraphFamily kind = GraphFamily::GasketTwoSided;
  /// Exit times by Monte Carlo instead of exact solves when reps > 0.
  std::size_t mc_reps = 0;
  std::uint64_t seed = 0;
};

/// Values of one quantity along the dyadic ladder n = 2^k:
///   volume         |B_o(2^k + 1)|, the closed ball of radius 2^k (3^{k+1}+2 on sg2)
///   exit-time      E_o[tau_{2^k}]
///   green-diagonal g_{2^k}(o,o)
///   resistance     R_eff(B_o(2^{k-1}), B_o(2^k)^c)
struct ScalingReport {
  ScalingQuantity quantity = ScalingQuantity::Volume;
  std::vector<int> levels;
  std::vector<int> radii;  // ball radius the value was measured on
  std::vector<double> values;
  std::vector<double> std_errors;  // zero for exact values
  std::vector<double> ratios;      // values[i+1] / values[i]
  double fitted_exponent = 0.0;    // slope of log value against log 2^k
  double intercept = 0.0;
  std::vector<double> fit_residuals;
  /// Predicted exponent: alpha, beta, beta - alpha, beta - alpha.
  double reference_exponent = 0.0;
};

ScalingReport scaling_fit(ScalingQuantity quantity, int k_min, int k_max,
                          const ScalingOptions& options = {});

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
};

/// Least squares of log y against log x.
LogLogFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

struct ShapeReport {
  int n = 0;
  double eps = 0.0;
  std::size_t reps = 0;
  std::size_t particles = 0;  // b_n
  int inner_target = 0;       // ceil(n (1 - eps))
  int outer_target = 0;       // ceil(n (1 + eps))
  double inner_ok_fraction = 0.0;
  double outer_ok_fraction = 0.0;
  std::vector<Radii> radii;
  std::size_t failed = 0;  // replicates aborted by the step cap
  std::vector<std::string> failures;
};

/// IDLA with b_n particles per replicate; checks
/// B_o(n(1-eps)) in I(b_n) and I(b_n) in B_o(n(1+eps)).
ShapeReport shape_experiment(int n, double eps, std::size_t reps, std::uint64_t seed,
                             GraphFamily kind = GraphFamily::GasketTwoSided);

struct FractionStats {
  int n = 0;
  std::size_t reps = 0;
  std::size_t ball_volume = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> samples;
};

/// |I_{b_n}(o -> n)| / b_n: b_n particles from o paused on leaving B_o(n).
FractionStats lb_fraction(int n, std::size_t reps, std::uint64_t seed,
                          GraphFamily kind = GraphFamily::GasketTwoSided);

struct AbsorptionReport {
  int n = 0;
  std::size_t k = 0;
  double delta = 0.0;
  int pause_radius = 0;  // n + ceil(k^{1/alpha})
  std::size_t reps = 0;
  std::vector<std::size_t> absorbed;  // new sites per replicate
  double success_fraction = 0.0;      // fraction with absorbed > delta k
  double mean_absorbed = 0.0;
};

/// Starting from S = B_o(n), launches k particles from the outermost layer of
/// S (cycling in (u,v) order) paused on leaving B_o(n + ceil(k^{1/alpha})).
/// Requires n^{1/(alpha+1)} < k < n^alpha.
AbsorptionReport annulus_absorption(int n, std::size_t k, double delta, std::size_t reps,
                                    std::uint64_t seed,
                                    GraphFamily kind = GraphFamily::GasketTwoSided);

struct GreenInfRow {
  int k = 0;
  int r = 0;
  int inner_radius = 0;  // ceil(u r)
  double infimum = 0.0;  // inf over B_o(ceil(u r)) of g_r(o, .)
  double normalized = 0.0;  // infimum / r^{beta - alpha}
};

struct GreenInfProfile {
  double u = 0.0;
  std::vector<GreenInfRow> rows;
  double floor = 0.0;  // min normalized value over the rows
};

GreenInfProfile green_inf_profile(const std::vector<int>& k_list, double u,
                                  GraphFamily kind = GraphFamily::GasketTwoSided);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
  std::size_t bins = 0;           // after pooling
  std::size_t outside_support = 0;  // observations with zero expected probability
};

/// Pearson chi-square goodness of fit. Bins with expected count below
/// `min_expected` are pooled; any observation outside the support of
/// `expected` forces p = 0.
template <typename Key>
ChiSquareResult chi_square_test(const std::map<Key, std::size_t>& observed,
                                const std::map<Key, double>& expected, std::size_t total,
                                double min_expected = 5.0);

ChiSquareResult chi_square_from_bins(const std::vector<double>& observed,
                                     const std::vector<double>& expected_counts,
                                     std::size_t outside_support, double min_expected);

struct AbelianReport {
  std::size_t k = 0;
  int pause_radius = 0;
  std::size_t reps = 0;
  std::map<std::vector<Vertex>, std::size_t> observed;
  std::map<std::vector<Vertex>, double> exact;
  std::size_t paused_total = 0;
  bool support_match = false;  // observed support is inside the exact support
  ChiSquareResult chi2;
};

/// Stopped-then-resumed IDLA from the origin against the exact k-particle law.
AbelianReport abelian_test(std::size_t k, int pause_radius, std::size_t reps, std::uint64_t seed,
                           GraphFamily kind = GraphFamily::GasketTwoSided);

// ---------------------------------------------------------------- template

template <typename Key>
ChiSquareResult chi_square_test(const std::map<Key, std::size_t>& observed,
                                const std::map<Key, double>& expected, std::size_t total,
                                double min_expected) {
  std::vector<double> obs;
  std::vector<double> exp;
  for (const auto& [key, p] : expected) {
    auto it = observed.find(key);
    obs.push_back(it == observed.end() ? 0.0 : static_cast<double>(it->second));
    exp.push_back(p * static_cast<double>(total));
  }
  std::size_t outside = 0;
  for (const auto& [key, count] : observed) {
    if (!expected.contains(key)) outside += count;
  }
  return chi_square_from_bins(obs, exp, outside, min_expected);
}

}  // namespace sgidla
