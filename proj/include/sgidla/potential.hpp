#pragma once

// Exact discrete potential theory on finite vertex sets of the fractal graphs.
//
// Sign convention: Delta h(x) = (1/deg x) sum_{y~x} h(y) - h(x). Expected exit
// times solve Delta h = -1, stopped Green columns solve Delta g(., x) = -delta_x
// and the sandpile odometer started from mass m at o solves
// Delta u = 1 - m delta_o. Every solve imposes h = 0 (or given boundary data)
// off the domain.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sgidla/graph.hpp"

namespace sgidla {

/// Finite set of vertices on which a Dirichlet problem is posed.
class Domain {
 public:
  Domain(GraphFamily kind, std::vector<Vertex> vertices);
  static Domain from_ball(const Ball& b);

  GraphFamily kind() const { return kind_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  std::optional<std::size_t> index_of(const Vertex& x) const;
  bool contains(const Vertex& x) const { return index_.contains(x); }

 private:
  GraphFamily kind_;
  std::vector<Vertex> vertices_;
  VertexMap<std::size_t> index_;
};

/// Dirichlet data: prescribed values on vertices outside the domain.
/// Vertices not listed are held at 0.
using BoundaryData = VertexMap<double>;

struct DirichletSolution {
  std::shared_ptr<const Domain> domain;
  std::vector<double> values;
  /// max_x |Delta h(x) - rhs(x)| / (2 max|h| + max|rhs| + max|boundary|): the
  /// normwise backward error of the solve.
  double residual = 0.0;
  /// max_x |Delta h(x) - rhs(x)| without normalization.
  double max_abs_residual = 0.0;

  /// Value at x; 0 outside the domain (absorbing boundary).
  double at(const Vertex& x) const;
};

inline constexpr double kSolverTolerance = 1e-12;
/// Domains above this size use preconditioned conjugate gradients instead of
/// a sparse Cholesky factorization.
inline constexpr std::size_t kDirectSolverLimit = 200'000;

/// Factorizes the Dirichlet Laplacian of one domain once and solves any
/// number of right-hand sides against it.
class DirichletSolver {
 public:
  explicit DirichletSolver(Domain domain);
  ~DirichletSolver();
  DirichletSolver(DirichletSolver&&) noexcept;
  DirichletSolver& operator=(DirichletSolver&&) noexcept;

  const Domain& domain() const { return *domain_; }
  std::shared_ptr<const Domain> shared_domain() const { return domain_; }

  /// Solves Delta h = rhs on the domain with h = boundary off it.
  DirichletSolution solve(std::span<const double> rhs, const BoundaryData& boundary = {}) const;

  /// Green column g(., source): Delta g = -delta_source.
  DirichletSolution green_column(const Vertex& source) const;

 private:
  struct Impl;
  std::shared_ptr<const Domain> domain_;
  std::unique_ptr<Impl> impl_;
};

DirichletSolution solve_dirichlet(const Domain& domain, std::span<const double> rhs,
                                  const BoundaryData& boundary = {});

/// g(y) = g_n(y, source): expected visits to `source` by a walk from y before
/// it leaves the ball.
struct GreenTable {
  Vertex source;
  DirichletSolution g;

  double at(const Vertex& y) const { return g.at(y); }
  double diagonal() const { return g.at(source); }
};

GreenTable stopped_green(const Ball& b, const Vertex& source);

/// E_x[tau] for every x in the ball, tau the first exit time.
DirichletSolution expected_exit_time(const Ball& b);

/// P_start[tau_target < tau_exit]. Equals 1 when start == target.
double hitting_probability(const Ball& b, const Vertex& target, const Vertex& start);

/// Hitting probabilities of `target` from every vertex of the ball.
DirichletSolution hitting_probabilities(const Ball& b, const Vertex& target);

/// Law of the first vertex outside `cluster` visited by a walk from `start`.
/// Entries are sorted by vertex.
std::vector<std::pair<Vertex, double>> harmonic_measure(GraphFamily kind,
                                                        std::span<const Vertex> cluster,
                                                        const Vertex& start);

/// Effective resistance between disjoint vertex sets A and B in the unit
/// conductance network induced on enclosing.interior and enclosing.boundary.
double effective_resistance(std::span<const Vertex> a, std::span<const Vertex> b,
                            const Ball& enclosing);

struct MeanValueCheck {
  int n = 0;
  double eps = 0.0;
  int inner_radius = 0;
  std::size_t ball_volume = 0;
  /// h_n(z) = b_n g_n(o,z) - sum_y g_n(y,z) on B_o(n), zero elsewhere.
  DirichletSolution h;
  double min_inner = 0.0;
  bool holds = false;
};

/// Mean-value inequality sum_y g_n(y,z) <= b_n g_n(o,z) on B_o(ceil(n(1-eps))).
MeanValueCheck mean_value_check(int n, double eps, GraphFamily kind = GraphFamily::GasketTwoSided);

struct MLExpectations {
  Vertex z;
  double em = 0.0;  // floor(b_n (1+eps)) g_n(o,z) / g_n(z,z)
  double el = 0.0;  // sum_y g_n(y,z) / g_n(z,z)
  double green_zz = 0.0;
};

/// Shared solves for evaluating E[M] and E[L~] at many points of one ball.
class MLCalculator {
 public:
  MLCalculator(int n, double eps, GraphFamily kind = GraphFamily::GasketTwoSided);

  const Ball& outer_ball() const { return ball_; }
  int inner_radius() const { return inner_radius_; }
  /// Vertices of B_o(ceil(n(1-eps))).
  std::span<const Vertex> inner_vertices() const;
  MLExpectations at(const Vertex& z) const;

 private:
  int n_;
  double eps_;
  int inner_radius_;
  Ball ball_;
  DirichletSolver solver_;
  DirichletSolution green_o_;     // g(., o)
  DirichletSolution visit_sums_;  // z -> sum_y g(y, z)
};

MLExpectations ml_expectations(int n, double eps, const Vertex& z,
                               GraphFamily kind = GraphFamily::GasketTwoSided);

}  // namespace sgidla
