#include "sgidla/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgidla/errors.hpp"
#include "sgidla/potential.hpp"

namespace sgidla {

// ---------------------------------------------------------------- radii

Radii cluster_radii(GraphFamily kind, std::span<const Vertex> sites, const Vertex& center) {
  const std::unordered_set<Vertex, VertexHash> members(sites.begin(), sites.end());
  if (!members.contains(center)) {
    throw DomainError("cluster center " + to_string(center) + " is not in the cluster");
  }
  std::unordered_set<Vertex, VertexHash> seen{center};
  std::vector<Vertex> layer{center};
  std::size_t found = 0;
  std::optional<int> inner;
  int outer = 0;
  for (int d = 0; found < members.size() || !inner; ++d) {
    for (const Vertex& x : layer) {
      if (members.contains(x)) {
        ++found;
        outer = d + 1;
      } else if (!inner) {
        inner = d;
      }
    }
    std::vector<Vertex> next;
    for (const Vertex& x : layer) {
      for (const Vertex& y : neighbors(kind, x)) {
        if (seen.insert(y).second) next.push_back(y);
      }
    }
    layer = std::move(next);
  }
  return {*inner, outer};
}

// ---------------------------------------------------------------- Cluster

Cluster::Cluster(GraphFamily kind, const Vertex& center) : kind_(kind), center_(center) {
  if (!sg_contains(kind, center)) {
    throw InvalidVertexError("cluster center " + to_string(center) + " is not a vertex");
  }
  sites_.push_back(center);
  members_.insert(center);
  reset_labels();
  radii_ = {0, 1};
  while (missing_[static_cast<std::size_t>(radii_.inner)] == 0) {
    if (static_cast<std::size_t>(++radii_.inner) >= missing_.size()) label_next_layer();
  }
}

Cluster Cluster::from_sites(GraphFamily kind, const Vertex& center, std::vector<Vertex> initial) {
  Cluster c(kind, center);
  if (std::find(initial.begin(), initial.end(), center) == initial.end()) {
    throw DomainError("initial cluster must contain its center " + to_string(center));
  }
  for (const Vertex& x : initial) {
    if (x != center && !c.contains(x)) c.attach(x);
  }
  c.initial_size_ = c.sites_.size();
  return c;
}

void Cluster::reset_labels() {
  dist_.clear();
  dist_.emplace(center_, 0);
  frontier_ = {center_};
  missing_ = {members_.contains(center_) ? 0u : 1u};
}

void Cluster::label_next_layer() {
  const int d = static_cast<int>(missing_.size());
  std::vector<Vertex> next;
  std::size_t missing = 0;
  for (const Vertex& x : frontier_) {
    for (const Vertex& y : neighbors(kind_, x)) {
      if (dist_.emplace(y, d).second) {
        next.push_back(y);
        if (!members_.contains(y)) ++missing;
      }
    }
  }
  frontier_ = std::move(next);
  missing_.push_back(missing);
}

void Cluster::attach(const Vertex& x) {
  if (!sg_contains(kind_, x)) throw InvalidVertexError(to_string(x) + " is not a vertex");
  if (members_.contains(x)) throw DomainError("site " + to_string(x) + " is already occupied");
  while (!dist_.contains(x)) label_next_layer();
  members_.insert(x);
  sites_.push_back(x);
  const int d = dist_.at(x);
  --missing_[static_cast<std::size_t>(d)];
  radii_.outer = std::max(radii_.outer, d + 1);
  while (missing_[static_cast<std::size_t>(radii_.inner)] == 0) {
    if (static_cast<std::size_t>(++radii_.inner) >= missing_.size()) label_next_layer();
  }
}

std::vector<Vertex> Cluster::canonical() const {
  std::vector<Vertex> out = sites_;
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- IDLA

namespace {

// Walk state shared by the IDLA variants: a LocalGraph with occupancy flags.
class IdlaEngine {
 public:
  explicit IdlaEngine(const Cluster& start) : graph_(start.kind()), cluster_(start) {
    for (const Vertex& x : start.sites()) occupy(graph_.id_of(x));
  }

  LocalGraph& graph() { return graph_; }
  Cluster& cluster() { return cluster_; }

  bool occupied(LocalGraph::Id id) const { return id < occupied_.size() && occupied_[id]; }

  void attach(LocalGraph::Id id) {
    occupy(id);
    cluster_.attach(graph_.vertex(id));
  }

  [[noreturn]] void step_cap_failure(std::size_t particle, std::size_t total, std::uint64_t cap,
                                     const Vertex& where) const {
    throw StepCapError("particle " + std::to_string(particle + 1) + " of " +
                       std::to_string(total) + " hit the step cap of " + std::to_string(cap) +
                       " at " + to_string(where) + "; partial cluster has " +
                       std::to_string(cluster_.size()) + " sites");
  }

 private:
  void occupy(LocalGraph::Id id) {
    if (occupied_.size() <= id) occupied_.resize(std::max<std::size_t>(id + 1, 2 * occupied_.size()), 0);
    occupied_[id] = 1;
  }

  LocalGraph graph_;
  Cluster cluster_;
  std::vector<char> occupied_;
};

// Lazily grown BFS distances from one center on a LocalGraph.
class DistanceLabels {
 public:
  DistanceLabels(LocalGraph& graph, const Vertex& center) : graph_(graph) {
    const auto c = graph_.id_of(center);
    set(c, 0);
    frontier_ = {c};
  }

  /// d(center, id) < r
  bool inside(LocalGraph::Id id, int r) {
    while (true) {
      if (id < dist_.size() && dist_[id] >= 0) return dist_[id] < r;
      // unlabeled means distance > radius_
      if (radius_ >= r - 1 || frontier_.empty()) return false;
      expand();
    }
  }

 private:
  void set(LocalGraph::Id id, int d) {
    if (dist_.size() <= id) dist_.resize(std::max<std::size_t>(id + 1, 2 * dist_.size()), -1);
    dist_[id] = d;
  }

  void expand() {
    ++radius_;
    std::vector<LocalGraph::Id> next;
    for (const auto x : frontier_) {
      const std::size_t deg = graph_.degree(x);
      for (std::size_t i = 0; i < deg; ++i) {
        const auto y = graph_.neighbor(x, i);
        if (y >= dist_.size() || dist_[y] < 0) {
          set(y, radius_);
          next.push_back(y);
        }
      }
    }
    frontier_ = std::move(next);
  }

  LocalGraph& graph_;
  std::vector<int> dist_;
  std::vector<LocalGraph::Id> frontier_;
  int radius_ = 0;
};

}  // namespace

Cluster idla_from(const Cluster& start, std::size_t k, RngStream& rng, std::uint64_t step_cap) {
  IdlaEngine engine(start);
  LocalGraph& g = engine.graph();
  const auto source = g.id_of(start.center());
  for (std::size_t i = 0; i < k; ++i) {
    // sigma = inf{t > 0 : X(t) not in cluster}: the first step is always taken.
    const auto first = g.neighbor(source, rng.below(g.degree(source)));
    LocalGraph::Id end = first;
    const WalkOutcome w = walk_until(
        rng, g, first, [&](LocalGraph::Id id) { return !engine.occupied(id); },
        step_cap > 0 ? step_cap - 1 : 0, StopReason::AttachedToCluster, &end);
    if (w.reason == StopReason::StepCap) engine.step_cap_failure(i, k, step_cap, w.end);
    engine.attach(end);
  }
  return std::move(engine.cluster());
}

Cluster idla(GraphFamily kind, const Vertex& source, std::size_t k, RngStream& rng,
             std::uint64_t step_cap) {
  return idla_from(Cluster(kind, source), k, rng, step_cap);
}

StoppedIdla idla_stopped(const Cluster& s, std::span<const Vertex> sources, int pause_radius,
                         RngStream& rng, std::uint64_t step_cap) {
  if (pause_radius < 1) throw DomainError("pause radius must be at least 1");
  IdlaEngine engine(s);
  LocalGraph& g = engine.graph();
  DistanceLabels dist(g, s.center());
  for (const Vertex& x : s.sites()) {
    if (!dist.inside(g.id_of(x), pause_radius)) {
      throw DomainError("cluster site " + to_string(x) + " lies outside the pause ball of radius " +
                        std::to_string(pause_radius));
    }
  }
  StoppedIdla out{s, {pause_radius, {}}};
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto source = g.id_of(sources[i]);
    const auto first = g.neighbor(source, rng.below(g.degree(source)));
    LocalGraph::Id end = first;
    bool paused = false;
    const WalkOutcome w = walk_until(
        rng, g, first,
        [&](LocalGraph::Id id) {
          if (!dist.inside(id, pause_radius)) {
            paused = true;
            return true;
          }
          return !engine.occupied(id);
        },
        step_cap > 0 ? step_cap - 1 : 0, StopReason::AttachedToCluster, &end);
    if (w.reason == StopReason::StepCap) engine.step_cap_failure(i, sources.size(), step_cap, w.end);
    if (paused) {
      out.paused.positions.push_back(g.vertex(end));
    } else {
      engine.attach(end);
    }
  }
  out.cluster = std::move(engine.cluster());
  return out;
}

Cluster idla_resume(const Cluster& s, const PausedParticles& paused, RngStream& rng,
                    std::uint64_t step_cap) {
  IdlaEngine engine(s);
  LocalGraph& g = engine.graph();
  for (std::size_t i = 0; i < paused.positions.size(); ++i) {
    const auto start = g.id_of(paused.positions[i]);
    LocalGraph::Id end = start;
    const WalkOutcome w = walk_until(
        rng, g, start, [&](LocalGraph::Id id) { return !engine.occupied(id); }, step_cap,
        StopReason::AttachedToCluster, &end);
    if (w.reason == StopReason::StepCap) {
      engine.step_cap_failure(i, paused.positions.size(), step_cap, w.end);
    }
    engine.attach(end);
  }
  return std::move(engine.cluster());
}

std::map<std::vector<Vertex>, double> idla_exact_distribution(GraphFamily kind, std::size_t k) {
  if (k > kExactIdlaMaxParticles) {
    throw CapacityError("exact IDLA distribution is limited to k <= " +
                        std::to_string(kExactIdlaMaxParticles) + " particles");
  }
  std::map<std::vector<Vertex>, double> states{{{kOrigin}, 1.0}};
  for (std::size_t step = 0; step < k; ++step) {
    std::map<std::vector<Vertex>, double> next;
    for (const auto& [sites, p] : states) {
      for (const auto& [y, q] : harmonic_measure(kind, sites, kOrigin)) {
        std::vector<Vertex> grown = sites;
        grown.insert(std::upper_bound(grown.begin(), grown.end(), y), y);
        next[std::move(grown)] += p * q;
      }
    }
    states = std::move(next);
  }
  return states;
}

// ---------------------------------------------------------------- sandpile

double SandpileState::mass_at(const Vertex& x) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), x);
  return it != vertices.end() && *it == x ? mass[static_cast<std::size_t>(it - vertices.begin())] : 0.0;
}

double SandpileState::odometer_at(const Vertex& x) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), x);
  return it != vertices.end() && *it == x ? odometer[static_cast<std::size_t>(it - vertices.begin())]
                                          : 0.0;
}

std::vector<Vertex> SandpileState::cluster() const {
  std::vector<Vertex> out;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (odometer[i] > 0.0 || mass[i] >= 1.0 - kFullTolerance || vertices[i] == source) {
      out.push_back(vertices[i]);
    }
  }
  return out;
}

double SandpileState::total_mass() const {
  double total = 0.0;
  for (double m : mass) total += m;
  return total;
}

namespace {

class SandpileRun {
 public:
  SandpileRun(GraphFamily kind, double initial_mass, const Vertex& source)
      : graph_(kind), source_(graph_.id_of(source)) {
    grow();
    mass_[source_] = initial_mass;
    initial_mass_ = initial_mass;
  }

  std::size_t sweep_until_stable(const SandpileOptions& opt) {
    std::size_t sweeps = 0;
    while (true) {
      double max_excess = 0.0;
      for (std::size_t i = 0; i < mass_.size(); ++i) max_excess = std::max(max_excess, mass_[i] - 1.0);
      if (max_excess < opt.tol) return sweeps;
      if (sweeps == opt.max_sweeps) {
        throw SolverError("sandpile did not stabilize within " + std::to_string(opt.max_sweeps) +
                          " sweeps (max excess " + std::to_string(max_excess) + ")");
      }
      ++sweeps;
      if (opt.order == ToppleOrder::Synchronous) {
        std::vector<std::pair<LocalGraph::Id, double>> unstable;
        for (std::size_t i = 0; i < mass_.size(); ++i) {
          if (mass_[i] > 1.0) unstable.emplace_back(static_cast<LocalGraph::Id>(i), mass_[i] - 1.0);
        }
        for (const auto& [id, excess] : unstable) topple(id, excess);
      } else {
        const auto order = sorted_ids(opt.order == ToppleOrder::ReverseLexicographic);
        for (const auto id : order) {
          if (mass_[id] > 1.0) topple(id, mass_[id] - 1.0);
        }
      }
    }
  }

  // Exact odometer on the current support {u > 0}: with w = u / deg the mass
  // balance deg(x) w(x) - sum_{y in S, y~x} w(y) = mu0(x) - 1 is a Dirichlet
  // problem Delta w = (1 - mu0) / deg. Adopted only if u > 0 on S and no
  // site outside S ends above 1 + tol.
  bool polish(double tol) {
    std::vector<Vertex> support;
    for (std::size_t i = 0; i < odometer_.size(); ++i) {
      if (odometer_[i] > 0.0) support.push_back(graph_.vertex(static_cast<LocalGraph::Id>(i)));
    }
    if (support.empty()) return true;
    std::vector<double> rhs(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) {
      const auto id = *graph_.find(support[i]);
      const double mu0 = id == source_ ? initial_mass_ : 0.0;
      rhs[i] = (1.0 - mu0) / static_cast<double>(graph_.degree(id));
    }
    std::vector<double> u(odometer_.size(), 0.0);
    try {
      const DirichletSolution w = solve_dirichlet(Domain(graph_.kind(), support), rhs);
      for (std::size_t i = 0; i < support.size(); ++i) {
        const auto id = *graph_.find(support[i]);
        u[id] = w.values[i] * static_cast<double>(graph_.degree(id));
        if (!(u[id] > 0.0)) return false;
      }
    } catch (const SolverError&) {
      return false;
    }
    std::vector<double> mass(odometer_.size(), 0.0);
    mass[source_] = initial_mass_;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i] == 0.0) continue;
      const auto id = static_cast<LocalGraph::Id>(i);
      const double share = u[i] / static_cast<double>(graph_.degree(id));
      mass[i] -= u[i];
      for (const auto y : graph_.neighbors(id)) mass[y] += share;
    }
    for (std::size_t i = 0; i < mass.size(); ++i) {
      if (u[i] == 0.0 && mass[i] > 1.0 + tol) return false;
    }
    odometer_ = std::move(u);
    mass_ = std::move(mass);
    return true;
  }

  SandpileState state(const Vertex& source) const {
    SandpileState s;
    s.kind = graph_.kind();
    s.source = source;
    s.initial_mass = initial_mass_;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
      if (mass_[i] != 0.0 || odometer_[i] != 0.0) keep.push_back(i);
    }
    std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
      return graph_.vertex(static_cast<LocalGraph::Id>(a)) < graph_.vertex(static_cast<LocalGraph::Id>(b));
    });
    for (const auto i : keep) {
      s.vertices.push_back(graph_.vertex(static_cast<LocalGraph::Id>(i)));
      s.mass.push_back(mass_[i]);
      s.odometer.push_back(odometer_[i]);
    }
    return s;
  }

 private:
  void grow() {
    mass_.resize(graph_.size(), 0.0);
    odometer_.resize(graph_.size(), 0.0);
  }

  void topple(LocalGraph::Id id, double excess) {
    const auto nbrs = graph_.neighbors(id);
    grow();
    const double share = excess / static_cast<double>(nbrs.size());
    mass_[id] -= excess;
    odometer_[id] += excess;
    for (const auto y : nbrs) mass_[y] += share;
  }

  std::vector<LocalGraph::Id> sorted_ids(bool reverse) {
    if (order_cache_.size() != graph_.size()) {
      order_cache_.resize(graph_.size());
      for (std::size_t i = 0; i < order_cache_.size(); ++i) order_cache_[i] = static_cast<LocalGraph::Id>(i);
      std::sort(order_cache_.begin(), order_cache_.end(),
                [&](auto a, auto b) { return graph_.vertex(a) < graph_.vertex(b); });
    }
    std::vector<LocalGraph::Id> out = order_cache_;
    if (reverse) std::reverse(out.begin(), out.end());
    return out;
  }

  LocalGraph graph_;
  LocalGraph::Id source_;
  double initial_mass_ = 0.0;
  std::vector<double> mass_;
  std::vector<double> odometer_;
  std::vector<LocalGraph::Id> order_cache_;
};

}  // namespace

SandpileState sandpile(GraphFamily kind, double initial_mass, const Vertex& source,
                       const SandpileOptions& options) {
  if (!(initial_mass >= 0.0)) throw DomainError("initial mass must be nonnegative");
  if (!(options.tol > 0.0)) throw DomainError("sandpile tolerance must be positive");
  SandpileRun run(kind, initial_mass, source);
  const std::size_t sweeps = run.sweep_until_stable(options);
  const bool polished = options.polish && run.polish(options.tol);
  SandpileState s = run.state(source);
  s.sweeps = sweeps;
  s.polished = polished;
  return s;
}

double odometer_residual(const SandpileState& state) {
  // mu0(x) - u(x) + sum_{y~x} u(y)/deg(y) - 1, which is Delta u - (1 - mu0) on
  // constant-degree graphs.
  double worst = 0.0;
  for (std::size_t i = 0; i < state.vertices.size(); ++i) {
    if (!(state.odometer[i] > 0.0)) continue;
    const Vertex& x = state.vertices[i];
    double inflow = 0.0;
    for (const Vertex& y : neighbors(state.kind, x)) {
      inflow += state.odometer_at(y) / static_cast<double>(degree(state.kind, y));
    }
    const double mu0 = x == state.source ? state.initial_mass : 0.0;
    worst = std::max(worst, std::abs(mu0 - state.odometer[i] + inflow - 1.0));
  }
  return worst;
}

// ---------------------------------------------------------------- rotor-router

RotorResult rotor_aggregation(GraphFamily kind, std::size_t k, RotorConfig rotors,
                              const Vertex& source, std::uint64_t step_cap) {
  LocalGraph g(kind);
  std::vector<std::uint8_t> rotor;
  std::vector<char> occupied;
  auto ensure = [&](LocalGraph::Id id) {
    if (rotor.size() <= id) {
      const std::size_t old = rotor.size();
      rotor.resize(id + 1, 0);
      occupied.resize(id + 1, 0);
      for (std::size_t i = old; i < rotor.size(); ++i) {
        const Vertex& x = g.vertex(static_cast<LocalGraph::Id>(i));
        if (auto it = rotors.rotor.find(x); it != rotors.rotor.end()) rotor[i] = it->second;
      }
    }
  };
  for (const auto& [x, r] : rotors.rotor) {
    if (r >= degree(kind, x)) {
      throw DomainError("rotor index " + std::to_string(r) + " out of range at " + to_string(x));
    }
  }

  Cluster cluster(kind, source);
  const auto src = g.id_of(source);
  ensure(src);
  occupied[src] = 1;
  for (std::size_t i = 0; i < k; ++i) {
    auto at = src;
    std::uint64_t steps = 0;
    while (occupied[at]) {
      if (steps++ == step_cap) {
        throw StepCapError("rotor particle " + std::to_string(i + 1) + " hit the step cap of " +
                           std::to_string(step_cap) + "; partial cluster has " +
                           std::to_string(cluster.size()) + " sites");
      }
      const auto deg = g.degree(at);
      rotor[at] = static_cast<std::uint8_t>((rotor[at] + 1) % deg);
      at = g.neighbor(at, rotor[at]);
      ensure(at);
    }
    occupied[at] = 1;
    cluster.attach(g.vertex(at));
  }

  RotorResult out{std::move(cluster), {}};
  out.rotors.rule = rotors.rule;
  for (std::size_t i = 0; i < rotor.size(); ++i) {
    if (rotor[i] != 0) out.rotors.rotor.emplace(g.vertex(static_cast<LocalGraph::Id>(i)), rotor[i]);
  }
  return out;
}

}  // namespace sgidla
