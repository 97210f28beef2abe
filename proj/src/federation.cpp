#include "frd/federation.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace frd {

const char* protocol_name(ProtocolKind protocol) {
  switch (protocol) {
    case ProtocolKind::Standalone: return "standalone";
    case ProtocolKind::FRD: return "frd";
    case ProtocolKind::MixFRD: return "mixfrd";
    case ProtocolKind::PD: return "pd";
    case ProtocolKind::FRL: return "frl";
  }
  return "unknown";
}

ProtocolKind parse_protocol(const std::string& name) {
  if (name == "standalone") return ProtocolKind::Standalone;
  if (name == "frd") return ProtocolKind::FRD;
  if (name == "mixfrd") return ProtocolKind::MixFRD;
  if (name == "pd") return ProtocolKind::PD;
  if (name == "frl") return ProtocolKind::FRL;
  throw std::invalid_argument("unknown protocol: " + name);
}

std::int64_t payload_bytes(ProtocolKind protocol, std::int64_t knowledge_size,
                           bool counted_proxy_entries) {
  if (knowledge_size < 0)
    throw std::invalid_argument("payload_bytes: negative knowledge size");
  switch (protocol) {
    case ProtocolKind::Standalone:
      return 0;
    case ProtocolKind::FRD:
    case ProtocolKind::MixFRD:
      return (counted_proxy_entries ? kProxyEntryBytesCounted : kProxyEntryBytes) *
             knowledge_size;
    case ProtocolKind::PD:
      return kReplayEntryBytes * knowledge_size;
    case ProtocolKind::FRL:
      return kBytesPerWeight * knowledge_size;
  }
  throw std::invalid_argument("payload_bytes: unknown protocol");
}

ClusterSpec FederationConfig::cluster_spec() const {
  return make_cluster_spec(sections, env.angle_limit);
}

void FederationConfig::validate() const {
  if (num_agents < 1)
    throw std::invalid_argument("FederationConfig: num_agents must be >= 1");
  if (schedule.episodes_per_round < 1)
    throw std::invalid_argument("FederationConfig: episodes_per_round must be >= 1");
  if (schedule.episode_budget < 0)
    throw std::invalid_argument("FederationConfig: negative episode budget");
  if (distill_epochs < 0)
    throw std::invalid_argument("FederationConfig: negative distill epochs");
  env.validate();
  if (protocol == ProtocolKind::FRD || protocol == ProtocolKind::MixFRD)
    cluster_spec().validate();
  if (exclude_self && num_agents < 2)
    throw std::invalid_argument("FederationConfig: exclude_self needs >= 2 agents");
}

std::string RoundLog::to_jsonl() const {
  nlohmann::ordered_json j;
  j["round"] = round;
  j["protocol"] = protocol_name(protocol);
  j["per_agent_uplink_bytes"] = per_agent_uplink_bytes;
  j["downlink_bytes"] = downlink_bytes;
  j["episodes_played"] = episodes_played;
  j["rolling_averages"] = rolling_averages;
  return j.dump();
}

void distill(A2cAgent& agent, const std::vector<DistillSample>& samples,
             int epochs, double lr) {
  if (samples.empty()) throw std::invalid_argument("distill: no samples");

  TrainBatch batch;
  batch.kind = LossKind::CrossEntropyVsDistribution;
  batch.inputs.reserve(samples.size());
  batch.targets.reserve(samples.size());
  for (const DistillSample& s : samples) {
    batch.inputs.emplace_back(s.state.begin(), s.state.end());
    batch.targets.push_back({s.policy[0], s.policy[1]});
  }
  for (int e = 0; e < epochs; ++e)
    apply_update(agent.policy_net, backward(agent.policy_net, batch), lr);
}

MissionRun::MissionRun(const FederationConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), mixup_rng_(mix_seed(seed ^ 0x7f4a7c159e3779b9ull)) {
  cfg_.validate();
  Rng master(mix_seed(seed));
  for (int i = 0; i < cfg_.num_agents; ++i) {
    agents_.push_back(make_agent(cfg_.agent, master()));
    agent_rngs_.emplace_back(master());
  }
}

bool MissionRun::step_round() {
  if (finished_) return false;

  const int budget = cfg_.schedule.episode_budget;
  if (episodes_done_ >= budget) {
    result_.capped = true;
    result_.completion_episode = budget;
    result_.episodes_per_agent = episodes_done_;
    finished_ = true;
    return false;
  }

  const int episodes_this_round =
      std::min(cfg_.schedule.episodes_per_round, budget - episodes_done_);

  // Episode slots are interleaved across agents so that "any agent first
  // reaches the mission" matches parallel play; the run stops at the first
  // completion, skipping the pending barrier.
  for (int slot = 0; slot < episodes_this_round; ++slot) {
    for (int i = 0; i < cfg_.num_agents; ++i) {
      run_training_episode(agents_[i], cfg_.env, agent_rngs_[i]);
      if (mission_progress(agents_[i]).complete) {
        result_.completed = true;
        result_.completing_agent = i;
        result_.completion_episode =
            static_cast<int>(agents_[i].episode_scores.size());
        result_.episodes_per_agent = result_.completion_episode;
        finished_ = true;
        return false;
      }
    }
  }
  episodes_done_ += episodes_this_round;

  if (episodes_done_ >= budget) {
    result_.capped = true;
    result_.completion_episode = budget;
    result_.episodes_per_agent = episodes_done_;
    finished_ = true;
    return false;
  }

  exchange_and_log(episodes_this_round);
  ++round_;
  return true;
}

void MissionRun::exchange_and_log(int episodes_this_round) {
  RoundLog log;
  log.round = round_;
  log.protocol = cfg_.protocol;
  log.episodes_played = episodes_this_round;
  log.per_agent_uplink_bytes.assign(agents_.size(), 0);
  log.per_agent_downlink_bytes.assign(agents_.size(), 0);

  switch (cfg_.protocol) {
    case ProtocolKind::Standalone:
      break;
    case ProtocolKind::FRD:
    case ProtocolKind::MixFRD:
      exchange_proxy(log);
      break;
    case ProtocolKind::PD:
      exchange_raw(log);
      break;
    case ProtocolKind::FRL:
      exchange_weights(log);
      break;
  }

  for (A2cAgent& agent : agents_) {
    agent.local_rm.clear();
    log.rolling_averages.push_back(mission_progress(agent).rolling_average);
  }

  log.downlink_bytes = log.per_agent_downlink_bytes.empty()
                           ? 0
                           : log.per_agent_downlink_bytes.front();
  for (std::int64_t b : log.per_agent_uplink_bytes) result_.total_uplink_bytes += b;
  for (std::int64_t b : log.per_agent_downlink_bytes)
    result_.total_downlink_bytes += b;
  result_.rounds.push_back(std::move(log));
}

void MissionRun::exchange_proxy(RoundLog& log) {
  const ClusterSpec spec = cfg_.cluster_spec();
  const bool counted = cfg_.count_weighted_merge;

  // Uplink: every agent ships its serialized local ProxRM to the server.
  std::vector<ProxyReplayMemory> uploads;
  uploads.reserve(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const ProxyReplayMemory local = build_proxrm(spec, agents_[i].local_rm);
    const auto buffer =
        counted ? serialize_with_counts(local) : serialize(local);
    log.per_agent_uplink_bytes[i] = static_cast<std::int64_t>(buffer.size());
    uploads.push_back(counted ? deserialize_with_counts(buffer, spec)
                              : deserialize(buffer, spec));
  }

  const MergeWeighting weighting =
      counted ? MergeWeighting::VisitCount : MergeWeighting::Uniform;

  // Downlink: merged global memory, then local distillation (MixFRD
  // interpolates the downloaded memory first, at no wire cost).
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    std::vector<ProxyReplayMemory> sources;
    if (cfg_.exclude_self) {
      for (std::size_t k = 0; k < uploads.size(); ++k)
        if (k != i) sources.push_back(uploads[k]);
    } else {
      sources = uploads;
    }
    const ProxyReplayMemory merged = merge_global(sources, weighting);
    const auto buffer =
        counted ? serialize_with_counts(merged) : serialize(merged);
    log.per_agent_downlink_bytes[i] = static_cast<std::int64_t>(buffer.size());
    const ProxyReplayMemory downloaded =
        counted ? deserialize_with_counts(buffer, spec) : deserialize(buffer, spec);

    std::vector<DistillSample> samples;
    if (cfg_.protocol == ProtocolKind::MixFRD && downloaded.size() >= 1) {
      samples = cfg_.mixup_beta_alpha
                    ? mixup_augment_beta(downloaded, *cfg_.mixup_beta_alpha,
                                         mixup_rng_)
                    : mixup_augment(downloaded, cfg_.mixup_lambda);
    } else {
      samples = distill_samples(downloaded);
    }
    if (!samples.empty())
      distill(agents_[i], samples, cfg_.distill_epochs, cfg_.distill_lr);
  }
}

void MissionRun::exchange_raw(RoundLog& log) {
  for (std::size_t i = 0; i < agents_.size(); ++i)
    log.per_agent_uplink_bytes[i] = payload_bytes(
        ProtocolKind::PD, static_cast<std::int64_t>(agents_[i].local_rm.size()));

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    std::vector<DistillSample> samples;
    std::int64_t global_entries = 0;
    for (std::size_t k = 0; k < agents_.size(); ++k) {
      if (cfg_.exclude_self && k == i) continue;
      global_entries += static_cast<std::int64_t>(agents_[k].local_rm.size());
      for (const ReplayEntry& e : agents_[k].local_rm.entries)
        samples.push_back({e.state.as_array(), e.policy});
    }
    log.per_agent_downlink_bytes[i] = payload_bytes(ProtocolKind::PD, global_entries);
    if (!samples.empty())
      distill(agents_[i], samples, cfg_.distill_epochs, cfg_.distill_lr);
  }
}

void MissionRun::exchange_weights(RoundLog& log) {
  for (std::size_t i = 1; i < agents_.size(); ++i) {
    if (!(agents_[i].policy_net.config == agents_[0].policy_net.config) ||
        !(agents_[i].value_net.config == agents_[0].value_net.config))
      throw std::invalid_argument(
          "FRL requires a homogeneous local NN structure across agents");
  }

  const std::vector<double> uniform_weights(agents_.size(), 1.0);

  std::vector<MlpModel> policies;
  std::vector<MlpModel> values;
  std::int64_t per_agent_bytes = 0;
  for (const A2cAgent& agent : agents_) {
    const auto policy_buf = serialize_model(agent.policy_net);
    per_agent_bytes = static_cast<std::int64_t>(policy_buf.size());
    policies.push_back(
        deserialize_model(policy_buf, agent.policy_net.config));
    if (cfg_.frl_average_value_net) {
      const auto value_buf = serialize_model(agent.value_net);
      per_agent_bytes += static_cast<std::int64_t>(value_buf.size());
      values.push_back(deserialize_model(value_buf, agent.value_net.config));
    }
  }

  const MlpModel policy_avg = average_models(policies, uniform_weights);
  MlpModel value_avg;
  if (cfg_.frl_average_value_net)
    value_avg = average_models(values, uniform_weights);

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    log.per_agent_uplink_bytes[i] = per_agent_bytes;
    log.per_agent_downlink_bytes[i] = per_agent_bytes;
    agents_[i].policy_net = policy_avg;
    if (cfg_.frl_average_value_net) agents_[i].value_net = value_avg;
  }
}

RunResult MissionRun::run() {
  while (step_round()) {
  }
  return result_;
}

RunResult run_mission(const FederationConfig& cfg, std::uint64_t seed) {
  return MissionRun(cfg, seed).run();
}

}  // namespace frd
