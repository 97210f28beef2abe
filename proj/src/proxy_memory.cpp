#include "frd/proxy_memory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "frd/wire.hpp"

namespace frd {

void ClusterSpec::validate() const {
  if (sections < 1) throw std::invalid_argument("ClusterSpec: sections must be >= 1");
  // The linearized index must fit the wire format's signed 32-bit integer.
  const double total = std::pow(static_cast<double>(sections), 4.0);
  if (total > static_cast<double>(std::numeric_limits<std::int32_t>::max()))
    throw std::invalid_argument("ClusterSpec: S^4 exceeds the 32-bit index space");
  for (const ComponentRange& r : ranges)
    if (!(r.lo < r.hi))
      throw std::invalid_argument("ClusterSpec: each range needs lo < hi");
}

std::int64_t ClusterSpec::total_clusters() const {
  const std::int64_t s = sections;
  return s * s * s * s;
}

ClusterSpec make_cluster_spec(int sections, double angle_limit) {
  ClusterSpec spec;
  spec.sections = sections;
  spec.ranges[0] = {-2.4, 2.4};                  // cart position
  spec.ranges[1] = {-3.0, 3.0};                  // cart velocity
  spec.ranges[2] = {-angle_limit, angle_limit};  // pole angle
  spec.ranges[3] = {-3.0, 3.0};                  // pole angular velocity
  spec.validate();
  return spec;
}

namespace {

int section_of(const ComponentRange& r, int sections, double x) {
  const double width = (r.hi - r.lo) / sections;
  const int i = static_cast<int>(std::floor((x - r.lo) / width));
  return std::clamp(i, 0, sections - 1);
}

std::array<int, 4> sections_of_index(const ClusterSpec& spec, std::int32_t index) {
  if (index < 0 || index >= spec.total_clusters())
    throw std::out_of_range("cluster index out of range");
  std::array<int, 4> sec{};
  std::int64_t rest = index;
  for (int c = 3; c >= 0; --c) {
    sec[c] = static_cast<int>(rest % spec.sections);
    rest /= spec.sections;
  }
  return sec;
}

}  // namespace

std::int32_t cluster_index_of(const ClusterSpec& spec, const EnvState& state) {
  const auto x = state.as_array();
  std::int64_t index = 0;
  for (int c = 0; c < 4; ++c)
    index = index * spec.sections + section_of(spec.ranges[c], spec.sections, x[c]);
  return static_cast<std::int32_t>(index);
}

EnvState proxy_state_of(const ClusterSpec& spec, std::int32_t cluster_index) {
  const auto sec = sections_of_index(spec, cluster_index);
  std::array<float, 4> mid{};
  for (int c = 0; c < 4; ++c) {
    const ComponentRange& r = spec.ranges[c];
    const double width = (r.hi - r.lo) / spec.sections;
    mid[c] = static_cast<float>(r.lo + (sec[c] + 0.5) * width);
  }
  return {mid[0], mid[1], mid[2], mid[3]};
}

ProxyReplayMemory build_proxrm(const ClusterSpec& spec, const ReplayMemory& rm) {
  spec.validate();
  struct Accum {
    double p_left = 0.0;
    double p_right = 0.0;
    std::uint32_t count = 0;
  };
  std::map<std::int32_t, Accum> groups;
  for (const ReplayEntry& e : rm.entries) {
    Accum& a = groups[cluster_index_of(spec, e.state)];
    a.p_left += e.policy[0];
    a.p_right += e.policy[1];
    ++a.count;
  }

  ProxyReplayMemory m;
  m.spec = spec;
  for (const auto& [index, a] : groups) {
    ProxyEntry entry;
    entry.cluster_index = index;
    entry.avg_policy = {static_cast<float>(a.p_left / a.count),
                        static_cast<float>(a.p_right / a.count)};
    entry.visit_count = a.count;
    m.entries.emplace(index, entry);
  }
  return m;
}

ProxyReplayMemory merge_global(const std::vector<ProxyReplayMemory>& memories,
                               MergeWeighting weighting) {
  if (memories.empty()) throw std::invalid_argument("merge_global: no memories");
  for (const ProxyReplayMemory& m : memories)
    if (!(m.spec == memories[0].spec))
      throw std::invalid_argument("merge_global: cluster spec mismatch");

  struct Accum {
    double p_left = 0.0;
    double p_right = 0.0;
    double weight = 0.0;
    std::uint64_t visits = 0;
  };
  std::map<std::int32_t, Accum> groups;
  for (const ProxyReplayMemory& m : memories) {
    for (const auto& [index, entry] : m.entries) {
      const double w = weighting == MergeWeighting::VisitCount
                           ? static_cast<double>(entry.visit_count)
                           : 1.0;
      Accum& a = groups[index];
      a.p_left += w * entry.avg_policy[0];
      a.p_right += w * entry.avg_policy[1];
      a.weight += w;
      a.visits += weighting == MergeWeighting::VisitCount ? entry.visit_count : 1;
    }
  }

  ProxyReplayMemory global;
  global.spec = memories[0].spec;
  for (const auto& [index, a] : groups) {
    ProxyEntry entry;
    entry.cluster_index = index;
    entry.avg_policy = {static_cast<float>(a.p_left / a.weight),
                        static_cast<float>(a.p_right / a.weight)};
    entry.visit_count = static_cast<std::uint32_t>(a.visits);
    global.entries.emplace(index, entry);
  }
  return global;
}

std::vector<DistillSample> distill_samples(const ProxyReplayMemory& m) {
  std::vector<DistillSample> samples;
  samples.reserve(m.size());
  for (const auto& [index, entry] : m.entries)
    samples.push_back({proxy_state_of(m.spec, index).as_array(), entry.avg_policy});
  return samples;
}

namespace {

PolicyPair renormalized(double p_left, double p_right) {
  const double sum = p_left + p_right;
  return {static_cast<float>(p_left / sum), static_cast<float>(p_right / sum)};
}

std::vector<DistillSample> mixup_impl(
    const ProxyReplayMemory& m,
    const std::function<double()>& next_portion) {
  struct Sortable {
    float angle;
    std::int32_t index;
    DistillSample sample;
  };
  std::vector<Sortable> sorted;
  sorted.reserve(m.size());
  for (const auto& [index, entry] : m.entries) {
    const EnvState proxy = proxy_state_of(m.spec, index);
    sorted.push_back({proxy.pole_angle, index, {proxy.as_array(), entry.avg_policy}});
  }
  std::sort(sorted.begin(), sorted.end(), [](const Sortable& a, const Sortable& b) {
    return a.angle != b.angle ? a.angle < b.angle : a.index < b.index;
  });

  std::vector<DistillSample> samples;
  samples.reserve(sorted.empty() ? 0 : 2 * sorted.size() - 1);
  for (const Sortable& s : sorted) samples.push_back(s.sample);
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double lambda = next_portion();
    const DistillSample& a = sorted[i].sample;
    const DistillSample& b = sorted[i + 1].sample;
    DistillSample mixed;
    for (int c = 0; c < 4; ++c)
      mixed.state[c] =
          static_cast<float>(lambda * a.state[c] + (1.0 - lambda) * b.state[c]);
    mixed.policy = renormalized(lambda * a.policy[0] + (1.0 - lambda) * b.policy[0],
                                lambda * a.policy[1] + (1.0 - lambda) * b.policy[1]);
    samples.push_back(mixed);
  }
  return samples;
}

}  // namespace

std::vector<DistillSample> mixup_augment(const ProxyReplayMemory& m,
                                         double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("mixup_augment: lambda must be in (0, 1)");
  return mixup_impl(m, [lambda] { return lambda; });
}

std::vector<DistillSample> mixup_augment_beta(const ProxyReplayMemory& m,
                                              double alpha, Rng& rng) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("mixup_augment_beta: alpha must be in (0, 1)");
  // Johnk's sampler; valid for shape parameters < 1.
  auto draw = [alpha, &rng] {
    for (;;) {
      const double x = std::pow(uniform01(rng), 1.0 / alpha);
      const double y = std::pow(uniform01(rng), 1.0 / alpha);
      if (x + y > 0.0 && x + y <= 1.0) {
        const double lambda = x / (x + y);
        if (lambda > 0.0 && lambda < 1.0) return lambda;
      }
    }
  };
  return mixup_impl(m, draw);
}

std::vector<std::uint8_t> serialize(const ProxyReplayMemory& m) {
  std::vector<std::uint8_t> out;
  out.reserve(m.size() * kProxyWireEntryBytes);
  for (const auto& [index, entry] : m.entries) {
    wire::put_i32(out, entry.cluster_index);
    wire::put_f32(out, entry.avg_policy[0]);
    wire::put_f32(out, entry.avg_policy[1]);
  }
  return out;
}

namespace {

ProxyReplayMemory decode(std::span<const std::uint8_t> bytes,
                         const ClusterSpec& spec, bool with_counts) {
  const std::size_t entry_bytes =
      with_counts ? kProxyWireEntryBytesWithCounts : kProxyWireEntryBytes;
  if (bytes.size() % entry_bytes != 0)
    throw std::runtime_error("proxy memory decode: malformed buffer length");
  spec.validate();

  ProxyReplayMemory m;
  m.spec = spec;
  for (std::size_t off = 0; off < bytes.size(); off += entry_bytes) {
    ProxyEntry entry;
    entry.cluster_index = wire::get_i32(bytes, off);
    if (entry.cluster_index < 0 || entry.cluster_index >= spec.total_clusters())
      throw std::runtime_error("proxy memory decode: cluster index out of range");
    entry.avg_policy = {wire::get_f32(bytes, off + 4), wire::get_f32(bytes, off + 8)};
    entry.visit_count = with_counts ? wire::get_u32(bytes, off + 12) : 1u;
    if (!m.entries.emplace(entry.cluster_index, entry).second)
      throw std::runtime_error("proxy memory decode: duplicate cluster index");
  }
  return m;
}

}  // namespace

ProxyReplayMemory deserialize(std::span<const std::uint8_t> bytes,
                              const ClusterSpec& spec) {
  return decode(bytes, spec, false);
}

std::vector<std::uint8_t> serialize_with_counts(const ProxyReplayMemory& m) {
  std::vector<std::uint8_t> out;
  out.reserve(m.size() * kProxyWireEntryBytesWithCounts);
  for (const auto& [index, entry] : m.entries) {
    wire::put_i32(out, entry.cluster_index);
    wire::put_f32(out, entry.avg_policy[0]);
    wire::put_f32(out, entry.avg_policy[1]);
    wire::put_u32(out, entry.visit_count);
  }
  return out;
}

ProxyReplayMemory deserialize_with_counts(std::span<const std::uint8_t> bytes,
                                          const ClusterSpec& spec) {
  return decode(bytes, spec, true);
}

std::string to_json(const ProxyReplayMemory& m) {
  nlohmann::ordered_json j;
  j["sections"] = m.spec.sections;
  auto& ranges = j["ranges"] = nlohmann::ordered_json::array();
  for (const ComponentRange& r : m.spec.ranges) ranges.push_back({r.lo, r.hi});
  auto& entries = j["entries"] = nlohmann::ordered_json::array();
  for (const auto& [index, entry] : m.entries) {
    const EnvState proxy = proxy_state_of(m.spec, index);
    entries.push_back({{"index", index},
                       {"proxy_state", proxy.as_array()},
                       {"policy", entry.avg_policy},
                       {"visits", entry.visit_count}});
  }
  return j.dump();
}

}  // namespace frd
