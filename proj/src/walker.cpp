#include "sgidla/walker.hpp"

#include <cmath>
#include <unordered_set>

#include "sgidla/parallel.hpp"

namespace sgidla {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Splits [0, count) into contiguous chunks, one LocalGraph per chunk.
template <typename Fn>
void for_each_chunk(std::size_t count, Fn&& fn) {
  const std::size_t chunks = std::min(count, default_workers());
  parallel_for(chunks, chunks, [&](std::size_t c) {
    fn(count * c / chunks, count * (c + 1) / chunks);
  });
}

// Marks the ball's interior as ids [0, b.size()) of a fresh LocalGraph.
LocalGraph graph_with_ball(const Ball& b) {
  LocalGraph g(b.kind);
  for (const Vertex& x : b.interior) g.id_of(x);
  return g;
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_id) {
  return splitmix64(master_seed ^ splitmix64(stream_id + 0x9E3779B97F4A7C15ULL));
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::HitTarget:
      return "hit-target";
    case StopReason::ExitedBall:
      return "exited-ball";
    case StopReason::AttachedToCluster:
      return "attached-to-cluster";
    case StopReason::StepCap:
      return "step-cap";
  }
  return "?";
}

WalkOutcome walk_until(RngStream& rng, GraphFamily kind, const Vertex& start,
                       const std::function<bool(const Vertex&)>& stop, std::uint64_t cap,
                       StopReason reason) {
  if (cap < 1) throw DomainError("step cap must be at least 1");
  LocalGraph graph(kind);
  const auto start_id = graph.id_of(start);
  return walk_until(
      rng, graph, start_id, [&](LocalGraph::Id id) { return stop(graph.vertex(id)); }, cap,
      reason);
}

ExitTimeEstimate mc_exit_time(GraphFamily kind, const Vertex& center, int n, std::size_t reps,
                              std::uint64_t seed, std::uint64_t cap) {
  if (reps < 1) throw DomainError("mc_exit_time needs at least one replicate");
  const Ball b = ball(kind, center, n);
  std::vector<double> steps(reps, 0.0);
  std::vector<char> capped(reps, 0);
  for_each_chunk(reps, [&](std::size_t begin, std::size_t end) {
    LocalGraph graph = graph_with_ball(b);
    const auto inside = static_cast<LocalGraph::Id>(b.size());
    const auto start = *graph.find(center);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng(seed, i);
      const WalkOutcome w = walk_until(
          rng, graph, start, [&](LocalGraph::Id id) { return id >= inside; }, cap,
          StopReason::ExitedBall);
      steps[i] = static_cast<double>(w.steps);
      capped[i] = w.reason == StopReason::StepCap;
    }
  });
  ExitTimeEstimate est;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < reps; ++i) {
    if (capped[i]) {
      ++est.cap_hits;
      continue;
    }
    sum += steps[i];
    sum_sq += steps[i] * steps[i];
  }
  est.reps = reps - est.cap_hits;
  if (est.reps == 0) throw StepCapError("every exit-time walk hit the step cap");
  const double m = static_cast<double>(est.reps);
  est.mean = sum / m;
  const double var = est.reps > 1 ? std::max(0.0, (sum_sq - m * est.mean * est.mean) / (m - 1)) : 0.0;
  est.std_error = std::sqrt(var / m);
  return est;
}

HitEstimate mc_hit_before_exit(const Vertex& start, std::span<const Vertex> targets, const Ball& b,
                               std::size_t reps, std::uint64_t seed, std::uint64_t cap) {
  if (targets.empty()) throw DomainError("target set is empty");
  if (reps < 1) throw DomainError("mc_hit_before_exit needs at least one replicate");
  if (!b.contains(start)) throw DomainError("start " + to_string(start) + " is not inside the ball");
  std::vector<char> hit(reps, 0);
  std::vector<char> capped(reps, 0);
  for_each_chunk(reps, [&](std::size_t begin, std::size_t end) {
    LocalGraph graph = graph_with_ball(b);
    const auto inside = static_cast<LocalGraph::Id>(b.size());
    std::vector<char> is_target;
    auto mark = [&](LocalGraph::Id id) {
      if (is_target.size() <= id) is_target.resize(id + 1, 0);
      is_target[id] = 1;
    };
    for (const Vertex& t : targets) mark(graph.id_of(t));
    const auto start_id = *graph.find(start);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng(seed, i);
      LocalGraph::Id end_id = 0;
      const WalkOutcome w = walk_until(
          rng, graph, start_id,
          [&](LocalGraph::Id id) {
            return (id < is_target.size() && is_target[id]) || id >= inside;
          },
          cap, StopReason::HitTarget, &end_id);
      capped[i] = w.reason == StopReason::StepCap;
      hit[i] = !capped[i] && end_id < is_target.size() && is_target[end_id];
    }
  });
  HitEstimate est;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < reps; ++i) {
    if (capped[i]) {
      ++est.cap_hits;
    } else {
      hits += hit[i];
    }
  }
  est.reps = reps - est.cap_hits;
  if (est.reps == 0) throw StepCapError("every hitting walk hit the step cap");
  est.p_hat = static_cast<double>(hits) / static_cast<double>(est.reps);
  est.std_error = std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(est.reps));
  return est;
}

}  // namespace sgidla
