#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "sgidla/graph.hpp"
#include "sgidla/walker.hpp"

namespace sgidla {

/// Inner radius: largest r with B_center(r) inside the set. Outer radius:
/// smallest r with the set inside B_center(r).
struct Radii {
  int inner = 0;
  int outer = 0;
};

Radii cluster_radii(GraphFamily kind, std::span<const Vertex> sites, const Vertex& center);

/// Occupied set of a growth process. Sites are kept in attachment order.
class Cluster {
 public:
  Cluster(GraphFamily kind, const Vertex& center);
  /// A cluster seeded with `initial` (which must contain center). Radii are
  /// computed on construction.
  static Cluster from_sites(GraphFamily kind, const Vertex& center, std::vector<Vertex> initial);

  GraphFamily kind() const { return kind_; }
  const Vertex& center() const { return center_; }
  const std::vector<Vertex>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  bool contains(const Vertex& x) const { return members_.contains(x); }
  std::size_t initial_size() const { return initial_size_; }
  std::size_t particle_count() const { return sites_.size() - initial_size_; }
  int inner_radius() const { return radii_.inner; }
  int outer_radius() const { return radii_.outer; }
  Radii radii() const { return radii_; }

  /// Sorted site list; the hashable state key of the exact oracle.
  std::vector<Vertex> canonical() const;

  // Growth; used by the processes below. Keeps radii up to date.
  void attach(const Vertex& x);

 private:
  void label_next_layer();
  void reset_labels();

  GraphFamily kind_;
  Vertex center_;
  std::vector<Vertex> sites_;
  std::unordered_set<Vertex, VertexHash> members_;
  std::size_t initial_size_ = 1;
  Radii radii_{1, 1};
  // BFS labels from the center: every vertex at distance < missing_.size()
  // is in dist_, and missing_[d] counts the unoccupied ones at distance d.
  VertexMap<int> dist_;
  std::vector<Vertex> frontier_;
  std::vector<std::size_t> missing_;
};

/// Direct IDLA: k particles from `source`, each settling at the first site
/// outside the current cluster (first exit time at t > 0). Cluster starts {source}.
Cluster idla(GraphFamily kind, const Vertex& source, std::size_t k, RngStream& rng,
             std::uint64_t step_cap = kDefaultStepCap);

/// Continues IDLA from an existing cluster with `k` more particles from its center.
Cluster idla_from(const Cluster& start, std::size_t k, RngStream& rng,
                  std::uint64_t step_cap = kDefaultStepCap);

/// Particles frozen on first leaving the pause ball, in launch order.
struct PausedParticles {
  int pause_radius = 0;
  std::vector<Vertex> positions;
};

struct StoppedIdla {
  Cluster cluster;
  PausedParticles paused;
};

/// IDLA with pausing: particles launched in order from `sources` walk until
/// they leave the cluster; a particle that reaches distance >= pause_radius
/// from the cluster center first is paused there instead of attaching.
StoppedIdla idla_stopped(const Cluster& s, std::span<const Vertex> sources, int pause_radius,
                         RngStream& rng, std::uint64_t step_cap = kDefaultStepCap);

/// Releases paused particles in order; each walks (from t = 0) until it stands
/// on an unoccupied site, which it occupies.
Cluster idla_resume(const Cluster& s, const PausedParticles& paused, RngStream& rng,
                    std::uint64_t step_cap = kDefaultStepCap);

/// Exact law of the k-particle IDLA cluster from the origin, keyed by
/// sorted site list. Requires k <= kExactIdlaMaxParticles.
inline constexpr std::size_t kExactIdlaMaxParticles = 5;
std::map<std::vector<Vertex>, double> idla_exact_distribution(GraphFamily kind, std::size_t k);

enum class ToppleOrder { Synchronous, Lexicographic, ReverseLexicographic };

struct SandpileOptions {
  double tol = 1e-10;
  ToppleOrder order = ToppleOrder::Synchronous;
  std::size_t max_sweeps = 50'000'000;
  /// After the sweeps converge, re-solve the odometer exactly on its support
  /// and keep that solution when it is self-consistent.
  bool polish = true;
};

inline constexpr double kFullTolerance = 1e-9;

struct SandpileState {
  GraphFamily kind = GraphFamily::GasketTwoSided;
  Vertex source;
  double initial_mass = 0.0;
  /// Every vertex that ever held mass, sorted by (u,v).
  std::vector<Vertex> vertices;
  std::vector<double> mass;
  std::vector<double> odometer;
  std::size_t sweeps = 0;
  bool polished = false;

  double mass_at(const Vertex& x) const;
  double odometer_at(const Vertex& x) const;
  /// Sites that toppled (positive odometer) or ended full (mass 1 up to
  /// kFullTolerance), plus the source.
  std::vector<Vertex> cluster() const;
  double total_mass() const;
};

/// Divisible sandpile started from `initial_mass` at `source`: every site with
/// mass above 1 keeps 1 and splits the excess equally among its neighbors,
/// until the largest excess is below tol.
SandpileState sandpile(GraphFamily kind, double initial_mass, const Vertex& source,
                       const SandpileOptions& options = {});

/// max |Delta u - (1 - m delta_source)| over the sandpile cluster.
double odometer_residual(const SandpileState& state);

/// Rotor at each vertex: an index into neighbors(kind, x). Absent means 0.
struct RotorConfig {
  VertexMap<std::uint8_t> rotor;
  /// Cyclic order the indices refer to.
  std::string rule = "ccw";

  std::uint8_t at(const Vertex& x) const {
    auto it = rotor.find(x);
    return it == rotor.end() ? 0 : it->second;
  }
};

struct RotorResult {
  Cluster cluster;
  RotorConfig rotors;
};

/// Rotor-router aggregation: at an occupied vertex a particle advances the
/// rotor one position and follows it; it settles on the first unoccupied vertex.
RotorResult rotor_aggregation(GraphFamily kind, std::size_t k, RotorConfig rotors,
                              const Vertex& source, std::uint64_t step_cap = kDefaultStepCap);

}  // namespace sgidla
