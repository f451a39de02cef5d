#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "sgidla/errors.hpp"
#include "sgidla/graph.hpp"

namespace sgidla {

/// Seed of stream (master, id): splitmix64(master ^ splitmix64(id + golden)),
/// fed to a std::mt19937_64. Identical pairs give identical draws everywhere.
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_id);

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : master_seed_(master_seed),
        stream_id_(stream_id),
        engine_(derive_stream_seed(master_seed, stream_id)) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n), n >= 1. Lemire's multiply-shift with rejection,
  /// so the result does not depend on the standard library's distributions.
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

enum class StopReason { HitTarget, ExitedBall, AttachedToCluster, StepCap };

std::string_view to_string(StopReason reason);

struct WalkOutcome {
  Vertex end;
  std::uint64_t steps = 0;
  StopReason reason = StopReason::StepCap;
};

inline constexpr std::uint64_t kDefaultStepCap = 100'000'000;

/// Runs a simple random walk on a LocalGraph from `start` until stop(id) holds
/// (checked from t = 0) or `cap` steps were taken. Returns the final id and
/// the number of steps, with `reason` set to StepCap on exhaustion.
template <typename Stop>
WalkOutcome walk_until(RngStream& rng, LocalGraph& graph, LocalGraph::Id start, Stop&& stop,
                       std::uint64_t cap, StopReason reason, LocalGraph::Id* end_id = nullptr) {
  LocalGraph::Id at = start;
  std::uint64_t t = 0;
  bool stopped = stop(at);
  while (!stopped && t < cap) {
    at = graph.neighbor(at, rng.below(graph.degree(at)));
    ++t;
    stopped = stop(at);
  }
  if (end_id) *end_id = at;
  return {graph.vertex(at), t, stopped ? reason : StopReason::StepCap};
}

/// Vertex-level convenience form.
WalkOutcome walk_until(RngStream& rng, GraphFamily kind, const Vertex& start,
                       const std::function<bool(const Vertex&)>& stop,
                       std::uint64_t cap = kDefaultStepCap,
                       StopReason reason = StopReason::HitTarget);

struct ExitTimeEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  std::size_t cap_hits = 0;  // walks that hit the step cap; excluded from the mean
};

/// Monte Carlo E_center[tau_n] with replicate i driven by stream (seed, i).
ExitTimeEstimate mc_exit_time(GraphFamily kind, const Vertex& center, int n, std::size_t reps,
                              std::uint64_t seed, std::uint64_t cap = kDefaultStepCap);

struct HitEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  std::size_t cap_hits = 0;
};

/// Fraction of walks from `start` that reach `targets` before leaving `b`.
HitEstimate mc_hit_before_exit(const Vertex& start, std::span<const Vertex> targets, const Ball& b,
                               std::size_t reps, std::uint64_t seed,
                               std::uint64_t cap = kDefaultStepCap);

}  // namespace sgidla
