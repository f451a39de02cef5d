#include "sgidla/potential.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sgidla/errors.hpp"

namespace sgidla {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

constexpr std::size_t kNotInDomain = std::numeric_limits<std::size_t>::max();

// Symmetric positive definite system solved either by sparse LDL^T or by
// incomplete-Cholesky preconditioned CG.
class SpdSystem {
 public:
  explicit SpdSystem(const SparseMatrix& a) : n_(a.rows()) {
    if (n_ == 0) throw SolverError("cannot solve a Dirichlet problem on an empty domain");
    if (static_cast<std::size_t>(n_) <= kDirectSolverLimit) {
      direct_.compute(a);
      if (direct_.info() != Eigen::Success) {
        throw SolverError("sparse factorization failed (singular domain?)");
      }
      // LDL^T of a singular positive semidefinite matrix can report success
      // with a zero pivot.
      if ((direct_.vectorD().array() <= 0.0).any()) {
        throw SolverError("Dirichlet matrix is singular: some component has no absorbing boundary");
      }
    } else {
      iterative_ = std::make_unique<Iterative>();
      iterative_->setTolerance(1e-15);
      iterative_->setMaxIterations(20 * n_);
      iterative_->compute(a);
      if (iterative_->info() != Eigen::Success) {
        throw SolverError("incomplete Cholesky preconditioner failed");
      }
    }
  }

  Vec solve(const Vec& b) const {
    if (iterative_) {
      Vec x = iterative_->solve(b);
      if (iterative_->info() != Eigen::Success) {
        throw SolverError("conjugate gradients did not converge within " +
                          std::to_string(iterative_->maxIterations()) + " iterations");
      }
      return x;
    }
    return direct_.solve(b);
  }

 private:
  using Iterative =
      Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                               Eigen::IncompleteCholesky<double>>;
  Eigen::Index n_;
  Eigen::SimplicialLDLT<SparseMatrix> direct_;
  std::unique_ptr<Iterative> iterative_;
};

double max_abs(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

Domain::Domain(GraphFamily kind, std::vector<Vertex> vertices)
    : kind_(kind), vertices_(std::move(vertices)) {
  index_.reserve(vertices_.size());
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!sg_contains(kind_, vertices_[i])) {
      throw InvalidVertexError("domain vertex " + to_string(vertices_[i]) + " is not in the graph");
    }
    if (!index_.emplace(vertices_[i], i).second) {
      throw DomainError("domain lists vertex " + to_string(vertices_[i]) + " twice");
    }
  }
}

Domain Domain::from_ball(const Ball& b) { return Domain(b.kind, b.interior); }

std::optional<std::size_t> Domain::index_of(const Vertex& x) const {
  if (auto it = index_.find(x); it != index_.end()) return it->second;
  return std::nullopt;
}

double DirichletSolution::at(const Vertex& x) const {
  if (!domain) return 0.0;
  if (auto i = domain->index_of(x)) return values[*i];
  return 0.0;
}

struct DirichletSolver::Impl {
  struct Edge {
    std::size_t to;  // kNotInDomain for an outside neighbor
    Vertex vertex;
  };
  std::vector<std::vector<Edge>> adjacency;
  std::unique_ptr<SpdSystem> system;
};

DirichletSolver::DirichletSolver(Domain domain)
    : domain_(std::make_shared<const Domain>(std::move(domain))), impl_(std::make_unique<Impl>()) {
  const auto& verts = domain_->vertices();
  const auto n = static_cast<Eigen::Index>(verts.size());
  if (n == 0) throw SolverError("cannot solve a Dirichlet problem on an empty domain");

  impl_->adjacency.resize(verts.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(verts.size() * (kMaxDegree + 1));
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const NeighborList nbrs = neighbors(domain_->kind(), verts[i]);
    const auto row = static_cast<Eigen::Index>(i);
    triplets.emplace_back(row, row, static_cast<double>(nbrs.size()));
    for (const Vertex& y : nbrs) {
      const auto j = domain_->index_of(y);
      impl_->adjacency[i].push_back({j.value_or(kNotInDomain), y});
      if (j) triplets.emplace_back(row, static_cast<Eigen::Index>(*j), -1.0);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  impl_->system = std::make_unique<SpdSystem>(a);
}

DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver&&) noexcept = default;
DirichletSolver& DirichletSolver::operator=(DirichletSolver&&) noexcept = default;

DirichletSolution DirichletSolver::solve(std::span<const double> rhs,
                                         const BoundaryData& boundary) const {
  const auto& verts = domain_->vertices();
  const std::size_t n = verts.size();
  if (rhs.size() != n) {
    throw DomainError("right-hand side has " + std::to_string(rhs.size()) +
                      " entries for a domain of " + std::to_string(n));
  }
  for (const auto& [x, value] : boundary) {
    if (domain_->contains(x)) {
      throw DomainError("boundary value given at interior vertex " + to_string(x));
    }
  }
  auto boundary_value = [&](const Vertex& y) {
    if (boundary.empty()) return 0.0;
    auto it = boundary.find(y);
    return it == boundary.end() ? 0.0 : it->second;
  };

  // deg(x) h(x) - sum_{y in D} h(y) = sum_{y not in D} f(y) - deg(x) rhs(x)
  Vec b(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double outside = 0.0;
    for (const auto& e : impl_->adjacency[i]) {
      if (e.to == kNotInDomain) outside += boundary_value(e.vertex);
    }
    b[static_cast<Eigen::Index>(i)] =
        outside - static_cast<double>(impl_->adjacency[i].size()) * rhs[i];
  }

  auto laplacian_residual = [&](const Vec& h, Vec& r) {
    // r = b - A h, in the deg-scaled form
    for (std::size_t i = 0; i < n; ++i) {
      const auto& adj = impl_->adjacency[i];
      double acc = b[static_cast<Eigen::Index>(i)] -
                   static_cast<double>(adj.size()) * h[static_cast<Eigen::Index>(i)];
      for (const auto& e : adj) {
        if (e.to != kNotInDomain) acc += h[static_cast<Eigen::Index>(e.to)];
      }
      r[static_cast<Eigen::Index>(i)] = acc;
    }
  };

  Vec h = impl_->system->solve(b);
  Vec r(static_cast<Eigen::Index>(n));
  laplacian_residual(h, r);
  // A couple of refinement sweeps recover the last digits on large domains.
  for (int step = 0; step < 3; ++step) {
    const double before = r.lpNorm<Eigen::Infinity>();
    if (before == 0.0) break;
    Vec candidate = h + impl_->system->solve(r);
    Vec r2(static_cast<Eigen::Index>(n));
    laplacian_residual(candidate, r2);
    if (r2.lpNorm<Eigen::Infinity>() >= before) break;
    h = std::move(candidate);
    r = std::move(r2);
  }

  DirichletSolution out;
  out.domain = domain_;
  out.values.assign(h.data(), h.data() + n);
  double abs_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // r is deg * (rhs - Delta h)
    abs_res = std::max(abs_res, std::abs(r[static_cast<Eigen::Index>(i)]) /
                                    static_cast<double>(impl_->adjacency[i].size()));
  }
  double boundary_max = 0.0;
  for (const auto& [x, value] : boundary) boundary_max = std::max(boundary_max, std::abs(value));
  const double scale = 2.0 * max_abs(out.values) + max_abs(rhs) + boundary_max;
  out.max_abs_residual = abs_res;
  out.residual = scale > 0.0 ? abs_res / scale : 0.0;
  if (!(out.residual <= kSolverTolerance)) {
    throw SolverError("Dirichlet solve residual " + std::to_string(out.residual) +
                      " exceeds tolerance");
  }
  return out;
}

DirichletSolution DirichletSolver::green_column(const Vertex& source) const {
  const auto i = domain_->index_of(source);
  if (!i) throw DomainError("Green source " + to_string(source) + " is outside the domain");
  std::vector<double> rhs(domain_->size(), 0.0);
  rhs[*i] = -1.0;
  return solve(rhs);
}

DirichletSolution solve_dirichlet(const Domain& domain, std::span<const double> rhs,
                                  const BoundaryData& boundary) {
  return DirichletSolver(domain).solve(rhs, boundary);
}

GreenTable stopped_green(const Ball& b, const Vertex& source) {
  if (!b.contains(source)) {
    throw DomainError("Green source " + to_string(source) + " is not inside the ball");
  }
  DirichletSolver solver(Domain::from_ball(b));
  return GreenTable{source, solver.green_column(source)};
}

DirichletSolution expected_exit_time(const Ball& b) {
  DirichletSolver solver(Domain::from_ball(b));
  std::vector<double> rhs(b.size(), -1.0);
  return solver.solve(rhs);
}

DirichletSolution hitting_probabilities(const Ball& b, const Vertex& target) {
  if (!b.contains(target)) {
    throw DomainError("target " + to_string(target) + " is not inside the ball");
  }
  std::vector<Vertex> rest;
  rest.reserve(b.size());
  for (const Vertex& x : b.interior) {
    if (x != target) rest.push_back(x);
  }
  if (rest.empty()) {
    // Only the target itself: the walk starts on it.
    DirichletSolution trivial;
    trivial.domain = std::make_shared<const Domain>(b.kind, std::vector<Vertex>{target});
    trivial.values = {1.0};
    return trivial;
  }
  Domain domain(b.kind, std::move(rest));
  BoundaryData boundary{{target, 1.0}};
  std::vector<double> rhs(domain.size(), 0.0);
  DirichletSolution sol = solve_dirichlet(domain, rhs, boundary);
  // Re-home the solution onto the full ball so that at(target) == 1.
  DirichletSolution out;
  out.domain = std::make_shared<const Domain>(Domain::from_ball(b));
  out.values.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    out.values[i] = b.interior[i] == target ? 1.0 : sol.at(b.interior[i]);
  }
  out.residual = sol.residual;
  out.max_abs_residual = sol.max_abs_residual;
  return out;
}

double hitting_probability(const Ball& b, const Vertex& target, const Vertex& start) {
  if (!b.contains(start)) {
    throw DomainError("start " + to_string(start) + " is not inside the ball");
  }
  if (start == target) {
    if (!b.contains(target)) throw DomainError("target is not inside the ball");
    return 1.0;
  }
  return hitting_probabilities(b, target).at(start);
}

std::vector<std::pair<Vertex, double>> harmonic_measure(GraphFamily kind,
                                                        std::span<const Vertex> cluster,
                                                        const Vertex& start) {
  Domain domain(kind, {cluster.begin(), cluster.end()});
  if (!domain.contains(start)) {
    throw DomainError("harmonic measure start " + to_string(start) + " is not in the cluster");
  }
  DirichletSolver solver(std::move(domain));
  // Reversibility: visits to x from start = deg(x) g(x, start) / deg(start),
  // so P[exit at y] = sum_{x in C, x ~ y} g(x, start) / deg(start).
  const DirichletSolution g = solver.green_column(start);
  const double deg_start = static_cast<double>(degree(kind, start));
  VertexMap<double> mass;
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    const Vertex& x = solver.domain().vertices()[i];
    for (const Vertex& y : neighbors(kind, x)) {
      if (!solver.domain().contains(y)) mass[y] += g.values[i] / deg_start;
    }
  }
  if (mass.empty()) throw DomainError("cluster has no outer boundary");
  std::vector<std::pair<Vertex, double>> out(mass.begin(), mass.end());
  std::sort(out.begin(), out.end());
  return out;
}

double effective_resistance(std::span<const Vertex> a, std::span<const Vertex> b,
                            const Ball& enclosing) {
  if (a.empty() || b.empty()) throw DomainError("effective resistance needs nonempty sets");
  VertexMap<std::size_t> region;
  std::vector<Vertex> region_vertices;
  for (const auto* list : {&enclosing.interior, &enclosing.boundary}) {
    for (const Vertex& x : *list) {
      region.emplace(x, region_vertices.size());
      region_vertices.push_back(x);
    }
  }
  VertexMap<double> fixed;
  for (const Vertex& x : a) {
    if (!region.contains(x)) throw DomainError("set A leaves the enclosing region at " + to_string(x));
    fixed[x] = 1.0;
  }
  for (const Vertex& x : b) {
    if (!region.contains(x)) throw DomainError("set B leaves the enclosing region at " + to_string(x));
    if (auto it = fixed.find(x); it != fixed.end() && it->second == 1.0) {
      throw DomainError("sets A and B overlap at " + to_string(x));
    }
    fixed[x] = 0.0;
  }

  // Free vertices get a harmonic potential for the induced network.
  VertexMap<std::size_t> free_index;
  std::vector<Vertex> free_vertices;
  for (const Vertex& x : region_vertices) {
    if (!fixed.contains(x)) {
      free_index.emplace(x, free_vertices.size());
      free_vertices.push_back(x);
    }
  }
  auto induced = [&](const Vertex& x) {
    std::vector<Vertex> out;
    for (const Vertex& y : neighbors(enclosing.kind, x)) {
      if (region.contains(y)) out.push_back(y);
    }
    return out;
  };

  VertexMap<double> potential = fixed;
  if (!free_vertices.empty()) {
    const auto m = static_cast<Eigen::Index>(free_vertices.size());
    std::vector<Eigen::Triplet<double>> triplets;
    Vec rhs = Vec::Zero(m);
    for (std::size_t i = 0; i < free_vertices.size(); ++i) {
      const auto nbrs = induced(free_vertices[i]);
      const auto row = static_cast<Eigen::Index>(i);
      triplets.emplace_back(row, row, static_cast<double>(nbrs.size()));
      for (const Vertex& y : nbrs) {
        if (auto it = free_index.find(y); it != free_index.end()) {
          triplets.emplace_back(row, static_cast<Eigen::Index>(it->second), -1.0);
        } else {
          rhs[row] += fixed.at(y);
        }
      }
    }
    SparseMatrix mat(m, m);
    mat.setFromTriplets(triplets.begin(), triplets.end());
    const Vec f = SpdSystem(mat).solve(rhs);
    for (std::size_t i = 0; i < free_vertices.size(); ++i) {
      potential[free_vertices[i]] = f[static_cast<Eigen::Index>(i)];
    }
  }

  double energy = 0.0;
  for (const Vertex& x : region_vertices) {
    for (const Vertex& y : induced(x)) {
      if (x < y) {
        const double d = potential.at(x) - potential.at(y);
        energy += d * d;
      }
    }
  }
  if (!(energy > 0.0)) throw SolverError("sets A and B are not connected in the enclosing region");
  return 1.0 / energy;
}

namespace {

void check_mean_value_args(int n, double eps) {
  if (n < 2) throw DomainError("n must be at least 2");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
}

// F(z) = sum_y g(y, z) = deg(z) psi(z) where Delta psi = -1/deg.
DirichletSolution visit_sums(const DirichletSolver& solver) {
  const auto& verts = solver.domain().vertices();
  const GraphFamily kind = solver.domain().kind();
  std::vector<double> rhs(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) {
    rhs[i] = -1.0 / static_cast<double>(degree(kind, verts[i]));
  }
  DirichletSolution psi = solver.solve(rhs);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    psi.values[i] *= static_cast<double>(degree(kind, verts[i]));
  }
  return psi;
}

}  // namespace

MeanValueCheck mean_value_check(int n, double eps, GraphFamily kind) {
  check_mean_value_args(n, eps);
  MeanValueCheck out;
  out.n = n;
  out.eps = eps;
  out.inner_radius = ceil_radius(n * (1.0 - eps));
  const Ball b = ball(kind, kOrigin, n);
  out.ball_volume = b.size();
  DirichletSolver solver(Domain::from_ball(b));
  const DirichletSolution green_o = solver.green_column(kOrigin);
  const DirichletSolution sums = visit_sums(solver);
  const double deg_o = static_cast<double>(degree(kind, kOrigin));

  out.h.domain = solver.shared_domain();
  out.h.values.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double g_oz =
        static_cast<double>(degree(kind, b.interior[i])) / deg_o * green_o.values[i];
    out.h.values[i] = static_cast<double>(b.size()) * g_oz - sums.values[i];
  }
  out.h.residual = std::max(green_o.residual, sums.residual);
  out.h.max_abs_residual = std::max(green_o.max_abs_residual, sums.max_abs_residual);

  const std::size_t inner_end = b.layer_start[std::min<std::size_t>(
      static_cast<std::size_t>(out.inner_radius), b.layer_start.size() - 1)];
  out.min_inner = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < inner_end; ++i) out.min_inner = std::min(out.min_inner, out.h.values[i]);
  out.holds = out.min_inner > 0.0;
  return out;
}

MLCalculator::MLCalculator(int n, double eps, GraphFamily kind)
    : n_(n),
      eps_(eps),
      inner_radius_((check_mean_value_args(n, eps), ceil_radius(n * (1.0 - eps)))),
      ball_(ball(kind, kOrigin, n)),
      solver_(Domain::from_ball(ball_)),
      green_o_(solver_.green_column(kOrigin)),
      visit_sums_(visit_sums(solver_)) {}

std::span<const Vertex> MLCalculator::inner_vertices() const {
  const std::size_t end = ball_.layer_start[std::min<std::size_t>(
      static_cast<std::size_t>(inner_radius_), ball_.layer_start.size() - 1)];
  return {ball_.interior.data(), end};
}

MLExpectations MLCalculator::at(const Vertex& z) const {
  const auto inner = inner_vertices();
  const auto i = ball_.index.find(z);
  if (i == ball_.index.end() || i->second >= inner.size()) {
    throw DomainError(to_string(z) + " is outside the inner ball of radius " +
                      std::to_string(inner_radius_));
  }
  const GraphFamily kind = ball_.kind;
  MLExpectations out;
  out.z = z;
  out.green_zz = solver_.green_column(z).values[i->second];
  const double g_oz = static_cast<double>(degree(kind, z)) /
                      static_cast<double>(degree(kind, kOrigin)) * green_o_.values[i->second];
  const double launched = std::floor(static_cast<double>(ball_.size()) * (1.0 + eps_) + 1e-9);
  out.em = launched * g_oz / out.green_zz;
  out.el = visit_sums_.values[i->second] / out.green_zz;
  return out;
}

MLExpectations ml_expectations(int n, double eps, const Vertex& z, GraphFamily kind) {
  return MLCalculator(n, eps, kind).at(z);
}

}  // namespace sgidla
