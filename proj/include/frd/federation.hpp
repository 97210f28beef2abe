#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frd/a2c.hpp"
#include "frd/cartpole.hpp"
#include "frd/proxy_memory.hpp"

namespace frd {

enum class ProtocolKind { Standalone, FRD, MixFRD, PD, FRL };

const char* protocol_name(ProtocolKind protocol);
ProtocolKind parse_protocol(const std::string& name);  // throws on unknown

// Per-entry payload unit sizes.
inline constexpr std::int64_t kProxyEntryBytes = 12;       // b_p
inline constexpr std::int64_t kProxyEntryBytesCounted = 16;
inline constexpr std::int64_t kReplayEntryBytes = 24;      // b_rm
inline constexpr std::int64_t kBytesPerWeight = 4;         // b_w

// Wire cost of one knowledge transfer in one direction. `knowledge_size` is
// M^p (FRD/MixFRD), M (PD) or W (FRL); Standalone costs nothing. Mixup
// augmentation never adds wire bytes (it runs locally after download).
std::int64_t payload_bytes(ProtocolKind protocol, std::int64_t knowledge_size,
                           bool counted_proxy_entries = false);

struct RoundSchedule {
  int episodes_per_round = 25;  // E
  int episode_budget = 5000;    // per-agent cap for the whole run
};

struct FederationConfig {
  ProtocolKind protocol = ProtocolKind::FRD;
  int num_agents = 2;
  EnvConfig env{};
  A2cConfig agent{};
  int sections = 30;  // S
  RoundSchedule schedule{};

  int distill_epochs = 5;
  double distill_lr = 1e-3;
  double mixup_lambda = 0.5;
  std::optional<double> mixup_beta_alpha{};  // draw portions from Beta(a, a)

  // Carries visit counts on the wire (16-byte proxy entries) and merges
  // count-weighted instead of uniformly.
  bool count_weighted_merge = false;
  // Drop the agent's own upload from what it downloads.
  bool exclude_self = false;
  // FRL: average the value net along with the policy net.
  bool frl_average_value_net = true;

  ClusterSpec cluster_spec() const;
  void validate() const;
};

struct RoundLog {
  int round = 0;
  ProtocolKind protocol = ProtocolKind::Standalone;
  std::vector<std::int64_t> per_agent_uplink_bytes;
  // Identical across agents except under exclude_self; downlink_bytes is the
  // per-agent figure of the default full-global download.
  std::vector<std::int64_t> per_agent_downlink_bytes;
  std::int64_t downlink_bytes = 0;
  int episodes_played = 0;  // per agent, this round
  std::vector<double> rolling_averages;

  std::string to_jsonl() const;  // one JSON object, no trailing newline
};

struct RunResult {
  bool completed = false;
  // Episodes played by the completing agent; equals the budget when capped.
  int completion_episode = 0;
  int completing_agent = -1;
  bool capped = false;
  int episodes_per_agent = 0;
  std::vector<RoundLog> rounds;
  std::int64_t total_uplink_bytes = 0;    // summed over agents and rounds
  std::int64_t total_downlink_bytes = 0;  // summed over agents and rounds
};

// Soft-target cross-entropy training of the policy net only.
void distill(A2cAgent& agent, const std::vector<DistillSample>& samples,
             int epochs, double lr);

// One mission: rounds of local training plus knowledge exchange until any
// agent's 10-episode rolling average reaches 490 or the budget runs out.
// Execution is serial and bit-reproducible for a given (config, seed).
class MissionRun {
 public:
  MissionRun(const FederationConfig& cfg, std::uint64_t seed);

  // Plays the next round; exchanges at the barrier if the run continues.
  // Returns false once the run is over (completed or capped).
  bool step_round();

  RunResult run();  // loops step_round to the end

  const RunResult& result() const { return result_; }
  const std::vector<A2cAgent>& agents() const { return agents_; }

 private:
  void exchange_and_log(int episodes_this_round);
  void exchange_proxy(RoundLog& log);
  void exchange_raw(RoundLog& log);
  void exchange_weights(RoundLog& log);

  FederationConfig cfg_;
  std::vector<A2cAgent> agents_;
  std::vector<Rng> agent_rngs_;
  Rng mixup_rng_;
  int round_ = 0;
  int episodes_done_ = 0;  // per agent
  bool finished_ = false;
  RunResult result_;
};

RunResult run_mission(const FederationConfig& cfg, std::uint64_t seed);

}  // namespace frd
