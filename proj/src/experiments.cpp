#include "sgidla/experiments.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "sgidla/errors.hpp"
#include "sgidla/parallel.hpp"
#include "sgidla/potential.hpp"
#include "sgidla/walker.hpp"

namespace sgidla {

std::string_view to_string(ScalingQuantity q) {
  switch (q) {
    case ScalingQuantity::Volume:
      return "volume";
    case ScalingQuantity::ExitTime:
      return "exit-time";
    case ScalingQuantity::GreenDiagonal:
      return "green-diagonal";
    case ScalingQuantity::Resistance:
      return "resistance";
  }
  return "?";
}

ScalingQuantity parse_scaling_quantity(std::string_view name) {
  for (auto q : {ScalingQuantity::Volume, ScalingQuantity::ExitTime,
                 ScalingQuantity::GreenDiagonal, ScalingQuantity::Resistance}) {
    if (name == to_string(q)) return q;
  }
  throw DomainError("unknown scaling quantity '" + std::string(name) +
                    "' (expected volume, exit-time, green-diagonal or resistance)");
}

LogLogFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("a log-log fit needs at least two points");
  const auto m = static_cast<double>(x.size());
  std::vector<double> lx(x.size());
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("log-log fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    fit.residuals.push_back(ly[i] - (fit.intercept + fit.slope * lx[i]));
  }
  return fit;
}

ScalingReport scaling_fit(ScalingQuantity quantity, int k_min, int k_max,
                          const ScalingOptions& options) {
  if (k_min < 1 || k_max <= k_min) throw DomainError("scaling fit needs 1 <= k_min < k_max");
  if (k_max > 24) throw CapacityError("scaling ladder beyond k = 24 exceeds the ball cap");
  ScalingReport rep;
  rep.quantity = quantity;
  switch (quantity) {
    case ScalingQuantity::Volume:
      rep.reference_exponent = constants::alpha;
      break;
    case ScalingQuantity::ExitTime:
      rep.reference_exponent = constants::beta;
      break;
    case ScalingQuantity::GreenDiagonal:
    case ScalingQuantity::Resistance:
      rep.reference_exponent = constants::beta - constants::alpha;
      break;
  }
  std::vector<double> scales;
  for (int k = k_min; k <= k_max; ++k) {
    const int r = 1 << k;
    double value = 0.0;
    double se = 0.0;
    int radius = r;
    switch (quantity) {
      case ScalingQuantity::Volume:
        radius = r + 1;
        value = static_cast<double>(ball_size(options.kind, kOrigin, radius));
        break;
      case ScalingQuantity::ExitTime:
        if (options.mc_reps > 0) {
          const auto est = mc_exit_time(options.kind, kOrigin, r, options.mc_reps,
                                        options.seed + static_cast<std::uint64_t>(k));
          value = est.mean;
          se = est.std_error;
        } else {
          value = expected_exit_time(ball(options.kind, kOrigin, r)).at(kOrigin);
        }
        break;
      case ScalingQuantity::GreenDiagonal:
        value = stopped_green(ball(options.kind, kOrigin, r), kOrigin).diagonal();
        break;
      case ScalingQuantity::Resistance: {
        const Ball outer = ball(options.kind, kOrigin, r);
        const Ball inner = ball(options.kind, kOrigin, r / 2);
        value = effective_resistance(inner.interior, outer.boundary, outer);
        break;
      }
    }
    rep.levels.push_back(k);
    rep.radii.push_back(radius);
    rep.values.push_back(value);
    rep.std_errors.push_back(se);
    scales.push_back(static_cast<double>(r));
  }
  for (std::size_t i = 0; i + 1 < rep.values.size(); ++i) {
    rep.ratios.push_back(rep.values[i + 1] / rep.values[i]);
  }
  const LogLogFit fit = fit_log_log(scales, rep.values);
  rep.fitted_exponent = fit.slope;
  rep.intercept = fit.intercept;
  rep.fit_residuals = fit.residuals;
  return rep;
}

ShapeReport shape_experiment(int n, double eps, std::size_t reps, std::uint64_t seed,
                             GraphFamily kind) {
  if (reps < 1) throw DomainError("shape experiment needs at least one replicate");
  if (n < 1) throw DomainError("shape experiment needs n >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
  ShapeReport rep;
  rep.n = n;
  rep.eps = eps;
  rep.reps = reps;
  rep.particles = ball_size(kind, kOrigin, n);
  rep.inner_target = ceil_radius(n * (1.0 - eps));
  rep.outer_target = ceil_radius(n * (1.0 + eps));

  std::vector<Radii> radii(reps);
  std::vector<std::string> errors(reps);
  // I(b_n): b_n particles on top of the origin.
  parallel_for(reps, default_workers(), [&](std::size_t i) {
    RngStream rng(seed, i);
    try {
      radii[i] = idla(kind, kOrigin, rep.particles, rng).radii();
    } catch (const StepCapError& e) {
      errors[i] = e.what();
    }
  });
  std::size_t inner_ok = 0;
  std::size_t outer_ok = 0;
  for (std::size_t i = 0; i < reps; ++i) {
    if (!errors[i].empty()) {
      ++rep.failed;
      rep.failures.push_back("replicate " + std::to_string(i) + ": " + errors[i]);
      continue;
    }
    rep.radii.push_back(radii[i]);
    // B_o(x) = {d < x} = {d < ceil(x)} for integer distances.
    inner_ok += radii[i].inner >= rep.inner_target;
    outer_ok += radii[i].outer <= rep.outer_target;
  }
  rep.inner_ok_fraction = static_cast<double>(inner_ok) / static_cast<double>(reps);
  rep.outer_ok_fraction = static_cast<double>(outer_ok) / static_cast<double>(reps);
  return rep;
}

FractionStats lb_fraction(int n, std::size_t reps, std::uint64_t seed, GraphFamily kind) {
  if (reps < 1) throw DomainError("lb_fraction needs at least one replicate");
  FractionStats st;
  st.n = n;
  st.reps = reps;
  st.ball_volume = ball_size(kind, kOrigin, n);
  const std::vector<Vertex> sources(st.ball_volume, kOrigin);
  st.samples.resize(reps);
  parallel_for(reps, default_workers(), [&](std::size_t i) {
    RngStream rng(seed, i);
    const StoppedIdla s = idla_stopped(Cluster(kind, kOrigin), sources, n, rng);
    st.samples[i] = static_cast<double>(s.cluster.size()) / static_cast<double>(st.ball_volume);
  });
  st.mean = std::accumulate(st.samples.begin(), st.samples.end(), 0.0) / static_cast<double>(reps);
  st.min = *std::min_element(st.samples.begin(), st.samples.end());
  st.max = *std::max_element(st.samples.begin(), st.samples.end());
  return st;
}

AbsorptionReport annulus_absorption(int n, std::size_t k, double delta, std::size_t reps,
                                    std::uint64_t seed, GraphFamily kind) {
  const double kd = static_cast<double>(k);
  const double low = std::pow(static_cast<double>(n), 1.0 / (constants::alpha + 1.0));
  const double high = std::pow(static_cast<double>(n), constants::alpha);
  if (!(kd > low && kd < high)) {
    throw DomainError("annulus absorption needs n^(1/(alpha+1)) < k < n^alpha (n=" +
                      std::to_string(n) + ", k=" + std::to_string(k) + ", range (" +
                      std::to_string(low) + ", " + std::to_string(high) + "))");
  }
  if (reps < 1) throw DomainError("annulus absorption needs at least one replicate");
  AbsorptionReport rep;
  rep.n = n;
  rep.k = k;
  rep.delta = delta;
  rep.reps = reps;
  rep.pause_radius = n + ceil_radius(std::pow(kd, 1.0 / constants::alpha));

  const Ball b = ball(kind, kOrigin, n);
  const Cluster start = Cluster::from_sites(kind, kOrigin, b.interior);
  const std::size_t outer_begin = b.layer_start[b.layer_start.size() - 2];
  const std::size_t outer_count = b.size() - outer_begin;
  std::vector<Vertex> sources(k);
  for (std::size_t j = 0; j < k; ++j) sources[j] = b.interior[outer_begin + j % outer_count];

  rep.absorbed.resize(reps);
  parallel_for(reps, default_workers(), [&](std::size_t i) {
    RngStream rng(seed, i);
    const StoppedIdla s = idla_stopped(start, sources, rep.pause_radius, rng);
    rep.absorbed[i] = s.cluster.size() - start.size();
  });
  std::size_t ok = 0;
  double total = 0.0;
  for (const auto a : rep.absorbed) {
    ok += static_cast<double>(a) > delta * kd;
    total += static_cast<double>(a);
  }
  rep.success_fraction = static_cast<double>(ok) / static_cast<double>(reps);
  rep.mean_absorbed = total / static_cast<double>(reps);
  return rep;
}

GreenInfProfile green_inf_profile(const std::vector<int>& k_list, double u, GraphFamily kind) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("u must lie in (0,1)");
  GreenInfProfile prof;
  prof.u = u;
  prof.floor = std::numeric_limits<double>::infinity();
  for (const int k : k_list) {
    if (k < 1 || k > 24) throw DomainError("green_inf_profile levels must lie in 1..24");
    GreenInfRow row;
    row.k = k;
    row.r = 1 << k;
    row.inner_radius = ceil_radius(u * row.r);
    const Ball b = ball(kind, kOrigin, row.r);
    const GreenTable g = stopped_green(b, kOrigin);  // g(y, o)
    const double deg_o = static_cast<double>(degree(kind, kOrigin));
    row.infimum = std::numeric_limits<double>::infinity();
    const std::size_t end = b.layer_start[static_cast<std::size_t>(row.inner_radius)];
    for (std::size_t i = 0; i < end; ++i) {
      // g(o, y) = deg(y) g(y, o) / deg(o)
      const double g_oy =
          static_cast<double>(degree(kind, b.interior[i])) / deg_o * g.g.values[i];
      row.infimum = std::min(row.infimum, g_oy);
    }
    row.normalized = row.infimum / std::pow(static_cast<double>(row.r), constants::beta - constants::alpha);
    prof.floor = std::min(prof.floor, row.normalized);
    prof.rows.push_back(row);
  }
  return prof;
}

ChiSquareResult chi_square_from_bins(const std::vector<double>& observed,
                                     const std::vector<double>& expected_counts,
                                     std::size_t outside_support, double min_expected) {
  ChiSquareResult res;
  res.outside_support = outside_support;
  // Pool every bin whose expectation is below min_expected.
  std::vector<std::pair<double, double>> bins;  // (observed, expected)
  std::pair<double, double> pool{0.0, 0.0};
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected_counts[i] < min_expected) {
      pool.first += observed[i];
      pool.second += expected_counts[i];
    } else {
      bins.emplace_back(observed[i], expected_counts[i]);
    }
  }
  if (pool.second > 0.0) {
    if (pool.second < min_expected && !bins.empty()) {
      auto smallest = std::min_element(bins.begin(), bins.end(),
                                       [](auto a, auto b) { return a.second < b.second; });
      smallest->first += pool.first;
      smallest->second += pool.second;
    } else {
      bins.push_back(pool);
    }
  }
  res.bins = bins.size();
  res.dof = static_cast<int>(bins.size()) - 1;
  for (const auto& [o, e] : bins) res.statistic += (o - e) * (o - e) / e;
  if (outside_support > 0) {
    res.statistic = std::numeric_limits<double>::infinity();
    res.p_value = 0.0;
  } else if (res.dof < 1) {
    res.p_value = 1.0;
  } else {
    res.p_value = boost::math::gamma_q(res.dof / 2.0, res.statistic / 2.0);
  }
  return res;
}

AbelianReport abelian_test(std::size_t k, int pause_radius, std::size_t reps, std::uint64_t seed,
                           GraphFamily kind) {
  if (k > 3) throw CapacityError("abelian_test compares against the exact law only for k <= 3");
  if (reps < 1) throw DomainError("abelian_test needs at least one replicate");
  AbelianReport rep;
  rep.k = k;
  rep.pause_radius = pause_radius;
  rep.reps = reps;
  rep.exact = idla_exact_distribution(kind, k);

  const std::vector<Vertex> sources(k, kOrigin);
  std::vector<std::vector<Vertex>> shapes(reps);
  std::vector<std::size_t> paused(reps);
  parallel_for(reps, default_workers(), [&](std::size_t i) {
    RngStream rng(seed, i);
    const StoppedIdla s = idla_stopped(Cluster(kind, kOrigin), sources, pause_radius, rng);
    paused[i] = s.paused.positions.size();
    shapes[i] = idla_resume(s.cluster, s.paused, rng).canonical();
  });
  for (std::size_t i = 0; i < reps; ++i) {
    ++rep.observed[shapes[i]];
    rep.paused_total += paused[i];
  }
  rep.support_match = std::all_of(rep.observed.begin(), rep.observed.end(),
                                  [&](const auto& kv) { return rep.exact.contains(kv.first); });
  rep.chi2 = chi_square_test(rep.observed, rep.exact, reps);
  return rep;
}

}  // namespace sgidla
