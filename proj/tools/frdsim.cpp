// Experiment driver for the federated-distillation Cartpole simulator.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frd/experiment.hpp"
#include "frd/federation.hpp"
#include "frd/mlp.hpp"

namespace {

struct CommonOpts {
  std::string preset;
  std::string protocol = "frd";
  int agents = 2;
  std::optional<int> sections;
  std::optional<int> period;
  std::optional<int> width;
  std::optional<int> layers;
  int budget = 5000;
  double gamma = 0.99;
  double policy_lr = 1e-3;
  double value_lr = 5e-3;
  int distill_epochs = 5;
  double distill_lr = 1e-3;
  double mixup_lambda = 0.5;
  std::optional<double> mixup_beta_alpha;
  bool count_weighted = false;
  bool exclude_self = false;
  bool frl_policy_only = false;
};

void add_common_options(CLI::App& cmd, CommonOpts& opts) {
  cmd.add_option("--preset", opts.preset,
                 "Named preset (see `frdsim presets`); explicit flags override it");
  cmd.add_option("--protocol", opts.protocol,
                 "standalone | frd | mixfrd | pd | frl");
  cmd.add_option("--agents", opts.agents, "Number of cooperating agents");
  cmd.add_option("-S,--sections", opts.sections,
                 "Sections per state component (S)");
  cmd.add_option("-E,--period", opts.period,
                 "Episodes between federation rounds (E)");
  cmd.add_option("-n,--width", opts.width,
                 "Neurons per hidden layer (n); the per-layer size knob");
  cmd.add_option("-l,--layers", opts.layers, "Hidden layers (l)");
  cmd.add_option("--budget", opts.budget, "Per-agent episode budget per run");
  cmd.add_option("--gamma", opts.gamma, "Return discount");
  cmd.add_option("--policy-lr", opts.policy_lr, "Policy net learning rate");
  cmd.add_option("--value-lr", opts.value_lr, "Value net learning rate");
  cmd.add_option("--distill-epochs", opts.distill_epochs,
                 "Gradient steps per distillation");
  cmd.add_option("--distill-lr", opts.distill_lr, "Distillation learning rate");
  cmd.add_option("--mixup-lambda", opts.mixup_lambda, "Fixed mixup portion");
  cmd.add_option("--mixup-beta-alpha", opts.mixup_beta_alpha,
                 "Draw mixup portions from Beta(a, a) instead of the fixed portion");
  cmd.add_flag("--count-weighted", opts.count_weighted,
               "Ship visit counts (16-byte proxy entries, count-weighted merge)");
  cmd.add_flag("--exclude-self", opts.exclude_self,
               "Exclude the agent's own upload from its download");
  cmd.add_flag("--frl-policy-only", opts.frl_policy_only,
               "FRL: exchange the policy net only");
  cmd.set_config("--config", "", "Config file with key=value lines");
}

frd::FederationConfig build_config(const CommonOpts& opts) {
  frd::ExperimentConfig base;
  if (!opts.preset.empty()) base = frd::make_preset(opts.preset);
  frd::FederationConfig cfg = base.federation;

  cfg.protocol = frd::parse_protocol(opts.protocol);
  cfg.num_agents = opts.agents;
  if (opts.sections) cfg.sections = *opts.sections;
  if (opts.period) cfg.schedule.episodes_per_round = *opts.period;
  if (opts.width) cfg.agent.hidden_width = *opts.width;
  if (opts.layers) cfg.agent.hidden_layers = *opts.layers;
  cfg.schedule.episode_budget = opts.budget;
  cfg.agent.discount = opts.gamma;
  cfg.agent.policy_lr = opts.policy_lr;
  cfg.agent.value_lr = opts.value_lr;
  cfg.distill_epochs = opts.distill_epochs;
  cfg.distill_lr = opts.distill_lr;
  cfg.mixup_lambda = opts.mixup_lambda;
  cfg.mixup_beta_alpha = opts.mixup_beta_alpha;
  cfg.count_weighted_merge = opts.count_weighted;
  cfg.exclude_self = opts.exclude_self;
  cfg.frl_average_value_net = !opts.frl_policy_only;
  cfg.validate();
  return cfg;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  return seeds;
}

int cmd_presets() {
  std::printf("%-10s %5s %5s %5s %3s\n", "name", "S", "E", "n", "l");
  for (const frd::PresetInfo& p : frd::preset_table())
    std::printf("%-10s %5d %5d %5d %3d\n", p.name.c_str(), p.sections,
                p.episodes_per_round, p.hidden_width, p.hidden_layers);
  return 0;
}

int cmd_run(const CommonOpts& opts, std::uint64_t seed, const std::string& out_dir) {
  const frd::FederationConfig cfg = build_config(opts);
  const frd::RunResult result = frd::run_mission(cfg, seed);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream rounds(out_dir + "/rounds.jsonl", std::ios::binary);
    for (const frd::RoundLog& log : result.rounds) rounds << log.to_jsonl() << "\n";

    const frd::RunRecord record = {cfg.protocol,
                                   cfg.num_agents,
                                   cfg.sections,
                                   cfg.schedule.episodes_per_round,
                                   cfg.agent.hidden_width,
                                   cfg.agent.hidden_layers,
                                   seed,
                                   result.completion_episode,
                                   result.capped,
                                   result.total_uplink_bytes,
                                   result.total_downlink_bytes};
    frd::write_runs_csv(out_dir + "/runs.csv", {record});
    frd::write_runs_jsonl(out_dir + "/runs.jsonl", {record});
  }

  std::printf("protocol=%s agents=%d seed=%llu %s at episode %d, "
              "uplink=%lld B downlink=%lld B over %zu rounds\n",
              frd::protocol_name(cfg.protocol), cfg.num_agents,
              static_cast<unsigned long long>(seed),
              result.completed ? "completed" : "capped",
              result.completion_episode,
              static_cast<long long>(result.total_uplink_bytes),
              static_cast<long long>(result.total_downlink_bytes),
              result.rounds.size());
  return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::vector<int>& agent_counts,
              std::uint64_t seed_base, int num_seeds, const std::string& out_dir) {
  CommonOpts cell_opts = opts;
  frd::ExperimentConfig cfg;
  cfg.federation = build_config(cell_opts);
  cfg.seeds = seed_range(seed_base, num_seeds);

  const frd::SweepResult result = frd::sweep(cfg, agent_counts);

  std::filesystem::create_directories(out_dir);
  frd::write_runs_csv(out_dir + "/runs.csv", result.runs);
  frd::write_runs_jsonl(out_dir + "/runs.jsonl", result.runs);
  frd::write_aggregates_csv(out_dir + "/aggregates.csv", result.aggregates);

  for (const frd::AggregateRow& row : result.aggregates)
    std::printf("protocol=%s agents=%d: median=%d p25=%d p75=%d (%d/%d capped)\n",
                frd::protocol_name(row.protocol), row.agents,
                row.median_completion, row.p25_completion, row.p75_completion,
                row.capped_runs, row.runs);
  std::printf("wrote %s/runs.csv, runs.jsonl, aggregates.csv\n", out_dir.c_str());
  return 0;
}

int cmd_payload(const std::string& protocol, std::int64_t size,
                std::optional<int> width, std::optional<int> layers,
                bool counted, bool both_nets) {
  const frd::ProtocolKind kind = frd::parse_protocol(protocol);
  std::int64_t knowledge = size;
  if (kind == frd::ProtocolKind::FRL && width && layers) {
    frd::MlpConfig policy_cfg;
    policy_cfg.hidden_width = *width;
    policy_cfg.hidden_layers = *layers;
    policy_cfg.output_dim = 2;
    knowledge = frd::weight_count(policy_cfg);
    if (both_nets) {
      frd::MlpConfig value_cfg = policy_cfg;
      value_cfg.output_dim = 1;
      knowledge += frd::weight_count(value_cfg);
    }
  }
  std::printf("%lld\n",
              static_cast<long long>(frd::payload_bytes(kind, knowledge, counted)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated reinforcement distillation simulator (Cartpole, A2C)"};
  app.require_subcommand(1);

  auto* presets = app.add_subcommand("presets", "List named presets");

  CommonOpts run_opts;
  std::uint64_t run_seed = 1;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Run a single mission");
  add_common_options(*run, run_opts);
  run->add_option("--seed", run_seed, "Run seed");
  run->add_option("--out", run_out, "Output directory (rounds.jsonl, runs.csv)");

  CommonOpts sweep_opts;
  std::vector<int> sweep_agents{2};
  std::uint64_t sweep_seed_base = 1;
  int sweep_num_seeds = 10;
  std::string sweep_out = "sweep_out";
  auto* sweep = app.add_subcommand("sweep", "Run a (agent count x seed) sweep");
  add_common_options(*sweep, sweep_opts);
  sweep->add_option("--agent-counts", sweep_agents, "Agent counts to sweep");
  sweep->add_option("--seed-base", sweep_seed_base, "First seed");
  sweep->add_option("--num-seeds", sweep_num_seeds, "Seeds per cell");
  sweep->add_option("--out", sweep_out, "Output directory");

  std::string payload_protocol = "frd";
  std::int64_t payload_size = 0;
  std::optional<int> payload_width, payload_layers;
  bool payload_counted = false;
  bool payload_both = false;
  auto* payload = app.add_subcommand(
      "payload", "Per-exchange payload bytes for a knowledge size");
  payload->add_option("--protocol", payload_protocol,
                      "standalone | frd | mixfrd | pd | frl");
  payload->add_option("--size", payload_size,
                      "Knowledge size: M^p entries (frd/mixfrd), M entries (pd), "
                      "W weights (frl)");
  payload->add_option("-n,--width", payload_width,
                      "FRL: neurons per hidden layer, computes W(n,l)");
  payload->add_option("-l,--layers", payload_layers, "FRL: hidden layers");
  payload->add_flag("--count-weighted", payload_counted,
                    "16-byte proxy entries (visit counts on the wire)");
  payload->add_flag("--both-nets", payload_both,
                    "FRL: count policy and value nets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets->parsed()) return cmd_presets();
    if (run->parsed()) return cmd_run(run_opts, run_seed, run_out);
    if (sweep->parsed())
      return cmd_sweep(sweep_opts, sweep_agents, sweep_seed_base,
                       sweep_num_seeds, sweep_out);
    if (payload->parsed())
      return cmd_payload(payload_protocol, payload_size, payload_width,
                         payload_layers, payload_counted, payload_both);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
