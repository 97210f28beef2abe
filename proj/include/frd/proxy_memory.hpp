#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "frd/cartpole.hpp"
#include "frd/replay.hpp"
#include "frd/rng.hpp"

namespace frd {

struct ComponentRange {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const ComponentRange&) const = default;
};

// Uniform grid over the 4 state components: `sections` sections per
// component, S^4 clusters in total.
struct ClusterSpec {
  std::array<ComponentRange, 4> ranges{};
  int sections = 1;  // S

  bool operator==(const ClusterSpec&) const = default;
  void validate() const;  // throws std::invalid_argument
  std::int64_t total_clusters() const;  // S^4
};

// Position/velocity/angle/angular-velocity ranges sized to Cartpole play;
// out-of-range observations clamp to the boundary sections.
ClusterSpec make_cluster_spec(int sections,
                              double angle_limit = 12.0 * std::numbers::pi / 180.0);

// Per component: i_c = clamp(floor((x_c - lo_c) / width_c), 0, S-1);
// linear index = ((i0*S + i1)*S + i2)*S + i3.
std::int32_t cluster_index_of(const ClusterSpec& spec, const EnvState& state);

// Midpoint of the cluster's section in every component.
EnvState proxy_state_of(const ClusterSpec& spec, std::int32_t cluster_index);

struct ProxyEntry {
  std::int32_t cluster_index = 0;
  PolicyPair avg_policy{};
  std::uint32_t visit_count = 0;
};

struct ProxyReplayMemory {
  ClusterSpec spec;
  std::map<std::int32_t, ProxyEntry> entries;  // keyed by cluster index

  std::size_t size() const { return entries.size(); }  // M^p
};

// Groups the raw memory by cluster; avg_policy is the arithmetic mean of the
// member policies and visit_count the member count.
ProxyReplayMemory build_proxrm(const ClusterSpec& spec, const ReplayMemory& rm);

enum class MergeWeighting {
  Uniform,     // every contributing memory counts once per cluster
  VisitCount,  // weight by visit counts (equals a build over concatenated RMs)
};

// Server-side merge into a global memory. Uniform mode records the number of
// contributing memories as the visit count (counts are not on the wire).
ProxyReplayMemory merge_global(const std::vector<ProxyReplayMemory>& memories,
                               MergeWeighting weighting);

// One policy-distillation training sample.
struct DistillSample {
  std::array<float, 4> state{};
  PolicyPair policy{};
};

// The memory's (proxy state, averaged policy) pairs, index-ascending.
std::vector<DistillSample> distill_samples(const ProxyReplayMemory& m);

// Sorts entries by the pole-angle component of their proxy states (ties by
// cluster index), then appends one synthetic sample per adjacent pair:
//   state*  = lambda * s_i + (1-lambda) * s_{i+1}
//   policy* = lambda * p_i + (1-lambda) * p_{i+1}   (renormalized)
// Returns originals plus synthetics: size 2*M^p - 1 for M^p >= 1.
std::vector<DistillSample> mixup_augment(const ProxyReplayMemory& m,
                                         double lambda);

// Variant drawing each pair's portion from Beta(alpha, alpha), 0 < alpha < 1.
std::vector<DistillSample> mixup_augment_beta(const ProxyReplayMemory& m,
                                              double alpha, Rng& rng);

inline constexpr std::size_t kProxyWireEntryBytes = 12;
inline constexpr std::size_t kProxyWireEntryBytesWithCounts = 16;

// 12 bytes per entry: int32 LE cluster index + two float32 LE policies.
// Visit counts stay off the wire; deserialize restores them as 1.
std::vector<std::uint8_t> serialize(const ProxyReplayMemory& m);
ProxyReplayMemory deserialize(std::span<const std::uint8_t> bytes,
                              const ClusterSpec& spec);

// 16 bytes per entry: the 12-byte layout plus a uint32 LE visit count.
std::vector<std::uint8_t> serialize_with_counts(const ProxyReplayMemory& m);
ProxyReplayMemory deserialize_with_counts(std::span<const std::uint8_t> bytes,
                                          const ClusterSpec& spec);

// Human-readable dump for debugging; never used for payload accounting.
std::string to_json(const ProxyReplayMemory& m);

}  // namespace frd
