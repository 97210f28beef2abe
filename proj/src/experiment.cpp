#include "frd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace frd {

const std::vector<PresetInfo>& preset_table() {
  static const std::vector<PresetInfo> presets = {
      {"setting1", 100, 25, 24, 2},
      {"setting2", 100, 25, 100, 2},
      {"setting3", 50, 25, 100, 2},
      {"setting4", 100, 10, 24, 1},
      {"setting5", 100, 50, 24, 1},
      {"fig3", 30, 25, 50, 2},
      {"fig4", 30, 25, 50, 2},
  };
  return presets;
}

ExperimentConfig make_preset(const std::string& name) {
  for (const PresetInfo& p : preset_table()) {
    if (p.name != name) continue;
    ExperimentConfig cfg;
    cfg.federation.sections = p.sections;
    cfg.federation.schedule.episodes_per_round = p.episodes_per_round;
    cfg.federation.agent.hidden_width = p.hidden_width;
    cfg.federation.agent.hidden_layers = p.hidden_layers;
    return cfg;
  }
  throw std::invalid_argument("unknown preset: " + name);
}

RunRecord run_cell(const FederationConfig& cfg, std::uint64_t seed) {
  const RunResult result = run_mission(cfg, seed);
  RunRecord record;
  record.protocol = cfg.protocol;
  record.agents = cfg.num_agents;
  record.sections = cfg.sections;
  record.episodes_per_round = cfg.schedule.episodes_per_round;
  record.hidden_width = cfg.agent.hidden_width;
  record.hidden_layers = cfg.agent.hidden_layers;
  record.seed = seed;
  record.completion_episode = result.completion_episode;
  record.capped = result.capped;
  record.total_uplink_bytes = result.total_uplink_bytes;
  record.total_downlink_bytes = result.total_downlink_bytes;
  return record;
}

int percentile_nearest_rank(std::vector<int> values, double p) {
  if (values.empty())
    throw std::invalid_argument("percentile of an empty sample");
  if (!(p > 0.0 && p <= 100.0))
    throw std::invalid_argument("percentile rank must be in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

AggregateRow aggregate_records(const std::vector<RunRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("aggregate of an empty record set");
  AggregateRow row;
  row.protocol = records[0].protocol;
  row.agents = records[0].agents;
  row.sections = records[0].sections;
  row.episodes_per_round = records[0].episodes_per_round;
  row.hidden_width = records[0].hidden_width;
  row.hidden_layers = records[0].hidden_layers;
  row.runs = static_cast<int>(records.size());
  std::vector<int> completions;
  completions.reserve(records.size());
  for (const RunRecord& r : records) {
    completions.push_back(r.completion_episode);
    if (r.capped) ++row.capped_runs;
  }
  row.median_completion = percentile_nearest_rank(completions, 50.0);
  row.p25_completion = percentile_nearest_rank(completions, 25.0);
  row.p75_completion = percentile_nearest_rank(completions, 75.0);
  return row;
}

int worker_count() {
  if (const char* env = std::getenv("FRDSIM_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

SweepResult sweep(const ExperimentConfig& cfg, const std::vector<int>& agent_counts) {
  if (agent_counts.empty())
    throw std::invalid_argument("sweep: no agent counts");
  if (cfg.seeds.empty()) throw std::invalid_argument("sweep: no seeds");

  struct Task {
    FederationConfig federation;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (int agents : agent_counts) {
    FederationConfig fed = cfg.federation;
    fed.num_agents = agents;
    for (std::uint64_t seed : cfg.seeds) tasks.push_back({fed, seed});
  }

  SweepResult result;
  result.runs.resize(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    result.runs[i] = run_cell(tasks[i].federation, tasks[i].seed);
  });

  const std::size_t per_count = cfg.seeds.size();
  for (std::size_t g = 0; g < agent_counts.size(); ++g) {
    const std::vector<RunRecord> group(
        result.runs.begin() + static_cast<std::ptrdiff_t>(g * per_count),
        result.runs.begin() + static_cast<std::ptrdiff_t>((g + 1) * per_count));
    result.aggregates.push_back(aggregate_records(group));
  }
  return result;
}

namespace {
constexpr const char* kRunsHeader =
    "protocol,agents,S,E,n,l,seed,completion_episode,capped,"
    "total_uplink_bytes,total_downlink_bytes";
}

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
  out << kRunsHeader << "\n";
  for (const RunRecord& r : runs) {
    out << protocol_name(r.protocol) << ',' << r.agents << ',' << r.sections
        << ',' << r.episodes_per_round << ',' << r.hidden_width << ','
        << r.hidden_layers << ',' << r.seed << ',' << r.completion_episode
        << ',' << (r.capped ? "true" : "false") << ',' << r.total_uplink_bytes
        << ',' << r.total_downlink_bytes << "\n";
  }
}

void write_runs_jsonl(std::ostream& out, const std::vector<RunRecord>& runs) {
  for (const RunRecord& r : runs) {
    nlohmann::ordered_json j;
    j["protocol"] = protocol_name(r.protocol);
    j["agents"] = r.agents;
    j["S"] = r.sections;
    j["E"] = r.episodes_per_round;
    j["n"] = r.hidden_width;
    j["l"] = r.hidden_layers;
    j["seed"] = r.seed;
    j["completion_episode"] = r.completion_episode;
    j["capped"] = r.capped;
    j["total_uplink_bytes"] = r.total_uplink_bytes;
    j["total_downlink_bytes"] = r.total_downlink_bytes;
    out << j.dump() << "\n";
  }
}

void write_aggregates_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "protocol,agents,S,E,n,l,runs,capped_runs,median_completion,"
         "p25_completion,p75_completion\n";
  for (const AggregateRow& r : rows) {
    out << protocol_name(r.protocol) << ',' << r.agents << ',' << r.sections
        << ',' << r.episodes_per_round << ',' << r.hidden_width << ','
        << r.hidden_layers << ',' << r.runs << ',' << r.capped_runs << ','
        << r.median_completion << ',' << r.p25_completion << ','
        << r.p75_completion << "\n";
  }
}

namespace {

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_runs_csv(const std::string& path, const std::vector<RunRecord>& runs) {
  auto out = open_or_throw(path);
  write_runs_csv(out, runs);
}

void write_runs_jsonl(const std::string& path, const std::vector<RunRecord>& runs) {
  auto out = open_or_throw(path);
  write_runs_jsonl(out, runs);
}

void write_aggregates_csv(const std::string& path,
                          const std::vector<AggregateRow>& rows) {
  auto out = open_or_throw(path);
  write_aggregates_csv(out, rows);
}

}  // namespace frd
