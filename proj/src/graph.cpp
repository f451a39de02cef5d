#include "sgidla/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_set>

#include "sgidla/errors.hpp"

namespace sgidla {

namespace {

// Counterclockwise unit directions in the triangular embedding.
constexpr std::array<Vertex, 6> kGasketDirs{{{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};
constexpr std::array<Vertex, 4> kCarpetDirs{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

constexpr bool admissible_anchor(std::int64_t a, std::int64_t b) {
  return a >= 0 && b >= 0 && (a & b) == 0;
}

// Membership in the positive one-sided gasket.
constexpr bool gasket_positive(std::int64_t u, std::int64_t v) {
  return admissible_anchor(u, v) || admissible_anchor(u - 1, v) || admissible_anchor(u, v - 1);
}

bool carpet_cell(std::int64_t u, std::int64_t v) {
  if (u < 0 || v < 0) return false;
  while (u > 0 && v > 0) {
    if (u % 3 == 1 && v % 3 == 1) return false;
    u /= 3;
    v /= 3;
  }
  return true;
}

// Bitmask over kGasketDirs of the edges leaving p in the positive gasket.
unsigned gasket_positive_edges(std::int64_t u, std::int64_t v) {
  unsigned mask = 0;
  if (admissible_anchor(u, v)) mask |= 0b000011;          // (1,0), (0,1)
  if (admissible_anchor(u - 1, v)) mask |= 0b001100;      // (-1,1), (-1,0)
  if (admissible_anchor(u, v - 1)) mask |= 0b110000;      // (0,-1), (1,-1)
  return mask;
}

// Reflection v -> -v maps direction i to direction i+3.
unsigned reflect_mask(unsigned mask) { return ((mask << 3) | (mask >> 3)) & 0b111111; }

unsigned gasket_edges(GraphFamily kind, const Vertex& x) {
  unsigned mask = 0;
  if (x.u >= 0 && x.v >= 0) mask |= gasket_positive_edges(x.u, x.v);
  if (kind == GraphFamily::GasketTwoSided && x.u <= 0 && x.v <= 0) {
    mask |= reflect_mask(gasket_positive_edges(-x.u, -x.v));
  }
  return mask;
}

// Layered BFS. Calls visit(vertex, distance) for every vertex with distance < n,
// in layer order with each layer sorted by (u,v).
template <typename Visit>
std::vector<Vertex> bfs_layers(GraphFamily kind, const Vertex& center, int n, std::size_t cap,
                               Visit&& visit) {
  if (!sg_contains(kind, center)) {
    throw InvalidVertexError("ball center " + to_string(center) + " is not a vertex of " +
                             std::string(to_string(kind)));
  }
  if (n < 0) throw DomainError("ball radius must be nonnegative");
  std::unordered_set<Vertex, VertexHash> seen;
  std::vector<Vertex> layer{center};
  seen.insert(center);
  std::size_t count = 0;
  for (int d = 0; d < n; ++d) {
    std::sort(layer.begin(), layer.end());
    count += layer.size();
    if (count > cap) {
      throw CapacityError("ball of radius " + std::to_string(n) + " exceeds the cap of " +
                          std::to_string(cap) + " vertices");
    }
    std::vector<Vertex> next;
    for (const Vertex& x : layer) {
      visit(x, d);
      for (const Vertex& y : neighbors(kind, x)) {
        if (seen.insert(y).second) next.push_back(y);
      }
    }
    layer = std::move(next);
  }
  std::sort(layer.begin(), layer.end());
  return layer;  // vertices at distance exactly n
}

}  // namespace

std::string to_string(const Vertex& x) {
  return "(" + std::to_string(x.u) + "," + std::to_string(x.v) + ")";
}

std::string_view to_string(GraphFamily kind) {
  switch (kind) {
    case GraphFamily::GasketTwoSided:
      return "sg2";
    case GraphFamily::GasketOneSided:
      return "sg1";
    case GraphFamily::CarpetQuadrant:
      return "carpet";
  }
  return "?";
}

GraphFamily parse_graph_family(std::string_view name) {
  if (name == "sg2" || name == "gasket-two-sided") return GraphFamily::GasketTwoSided;
  if (name == "sg1" || name == "gasket-one-sided") return GraphFamily::GasketOneSided;
  if (name == "carpet" || name == "carpet-quadrant") return GraphFamily::CarpetQuadrant;
  throw DomainError("unknown graph family '" + std::string(name) + "' (expected sg2, sg1 or carpet)");
}

bool NeighborList::contains(const Vertex& x) const {
  return std::find(begin(), end(), x) != end();
}

bool sg_contains(GraphFamily kind, const Vertex& x) {
  switch (kind) {
    case GraphFamily::GasketTwoSided:
      return (x.u >= 0 && x.v >= 0 && gasket_positive(x.u, x.v)) ||
             (x.u <= 0 && x.v <= 0 && gasket_positive(-x.u, -x.v));
    case GraphFamily::GasketOneSided:
      return x.u >= 0 && x.v >= 0 && gasket_positive(x.u, x.v);
    case GraphFamily::CarpetQuadrant:
      return carpet_cell(x.u, x.v);
  }
  return false;
}

NeighborList neighbors(GraphFamily kind, const Vertex& x) {
  if (!sg_contains(kind, x)) {
    throw InvalidVertexError(to_string(x) + " is not a vertex of " + std::string(to_string(kind)));
  }
  NeighborList out;
  if (kind == GraphFamily::CarpetQuadrant) {
    for (const Vertex& d : kCarpetDirs) {
      if (carpet_cell(x.u + d.u, x.v + d.v)) out.push_back(x + d);
    }
    return out;
  }
  const unsigned mask = gasket_edges(kind, x);
  for (std::size_t i = 0; i < kGasketDirs.size(); ++i) {
    if (mask & (1u << i)) out.push_back(x + kGasketDirs[i]);
  }
  return out;
}

std::size_t degree(GraphFamily kind, const Vertex& x) { return neighbors(kind, x).size(); }

int ceil_radius(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

Ball ball(GraphFamily kind, const Vertex& center, int n, std::size_t cap) {
  if (n < 1) throw DomainError("ball radius must be at least 1, got " + std::to_string(n));
  Ball b;
  b.kind = kind;
  b.center = center;
  b.radius = n;
  int current = -1;
  b.boundary = bfs_layers(kind, center, n, cap, [&](const Vertex& x, int d) {
    if (d != current) {
      b.layer_start.push_back(b.interior.size());
      current = d;
    }
    b.index.emplace(x, b.interior.size());
    b.interior.push_back(x);
  });
  b.layer_start.push_back(b.interior.size());
  return b;
}

std::size_t ball_size(GraphFamily kind, const Vertex& center, int n, std::size_t cap) {
  if (n < 1) throw DomainError("ball radius must be at least 1, got " + std::to_string(n));
  std::size_t count = 0;
  bfs_layers(kind, center, n, cap, [&](const Vertex&, int) { ++count; });
  return count;
}

std::vector<std::size_t> ball_size_profile(GraphFamily kind, const Vertex& center, int n_max,
                                           std::size_t cap) {
  std::vector<std::size_t> per_layer(static_cast<std::size_t>(std::max(n_max, 0)), 0);
  bfs_layers(kind, center, n_max, cap, [&](const Vertex&, int d) { ++per_layer[d]; });
  std::vector<std::size_t> sizes(per_layer.size() + 1, 0);
  for (std::size_t r = 1; r < sizes.size(); ++r) sizes[r] = sizes[r - 1] + per_layer[r - 1];
  return sizes;
}

AnnulusBound annulus_bound_check(int n, double eps, GraphFamily kind) {
  if (n < 1 || !(eps >= 1.0 / n && eps < 1.0)) {
    throw DomainError("annulus bound needs 1/n <= eps < 1 (n=" + std::to_string(n) +
                      ", eps=" + std::to_string(eps) + ")");
  }
  AnnulusBound r;
  r.n = n;
  r.eps = eps;
  r.inner_radius = ceil_radius(n * (1.0 - eps));
  const auto sizes = ball_size_profile(kind, kOrigin, n);
  r.lhs = sizes[n] - sizes[r.inner_radius];
  r.rhs = 4.0 * std::pow(eps, constants::alpha - 1.0) * static_cast<double>(sizes[n]);
  r.holds = static_cast<double>(r.lhs) <= r.rhs;
  return r;
}

std::optional<int> graph_distance(GraphFamily kind, const Vertex& x, const Vertex& y, int cap) {
  for (const Vertex& p : {x, y}) {
    if (!sg_contains(kind, p)) {
      throw InvalidVertexError(to_string(p) + " is not a vertex of " + std::string(to_string(kind)));
    }
  }
  if (x == y) return 0;
  VertexMap<int> dist_x{{x, 0}};
  VertexMap<int> dist_y{{y, 0}};
  std::vector<Vertex> front_x{x};
  std::vector<Vertex> front_y{y};
  int rx = 0;
  int ry = 0;
  while (rx + ry < cap && !front_x.empty() && !front_y.empty()) {
    // grow the smaller frontier by one layer
    const bool grow_x = front_x.size() <= front_y.size();
    auto& front = grow_x ? front_x : front_y;
    auto& mine = grow_x ? dist_x : dist_y;
    const auto& other = grow_x ? dist_y : dist_x;
    int& radius = grow_x ? rx : ry;
    ++radius;
    std::vector<Vertex> next;
    std::optional<int> best;
    for (const Vertex& p : front) {
      for (const Vertex& q : neighbors(kind, p)) {
        if (mine.contains(q)) continue;
        mine.emplace(q, radius);
        next.push_back(q);
        if (auto it = other.find(q); it != other.end()) {
          const int d = radius + it->second;
          if (!best || d < *best) best = d;
        }
      }
    }
    if (best) return *best <= cap ? best : std::nullopt;
    front = std::move(next);
  }
  return std::nullopt;
}

LocalGraph::LocalGraph(GraphFamily kind) : kind_(kind) {}

LocalGraph::Id LocalGraph::id_of(const Vertex& x) {
  if (auto it = ids_.find(x); it != ids_.end()) return it->second;
  if (!sg_contains(kind_, x)) {
    throw InvalidVertexError(to_string(x) + " is not a vertex of " + std::string(to_string(kind_)));
  }
  const auto id = static_cast<Id>(vertices_.size());
  vertices_.push_back(x);
  nodes_.emplace_back();
  ids_.emplace(x, id);
  return id;
}

std::optional<LocalGraph::Id> LocalGraph::find(const Vertex& x) const {
  if (auto it = ids_.find(x); it != ids_.end()) return it->second;
  return std::nullopt;
}

void LocalGraph::expand_slow(Id id) {
  const NeighborList nbrs = sgidla::neighbors(kind_, vertices_[id]);
  std::array<Id, kMaxDegree> ids{};
  for (std::size_t i = 0; i < nbrs.size(); ++i) ids[i] = id_of(nbrs[i]);
  Node& node = nodes_[id];
  node.nbr = ids;
  node.degree = static_cast<std::uint8_t>(nbrs.size());
  node.expanded = true;
}

}  // namespace sgidla
