#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "frd/federation.hpp"

namespace frd {

struct ExperimentConfig {
  FederationConfig federation;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
};

struct PresetInfo {
  std::string name;
  int sections;           // S
  int episodes_per_round; // E
  int hidden_width;       // n
  int hidden_layers;      // l
};

const std::vector<PresetInfo>& preset_table();

// Named hyperparameter presets (setting1..setting5, fig3, fig4). Everything
// not covered by the preset keeps FederationConfig defaults.
ExperimentConfig make_preset(const std::string& name);

// One (config, seed) outcome; one CSV row.
struct RunRecord {
  ProtocolKind protocol = ProtocolKind::FRD;
  int agents = 0;
  int sections = 0;
  int episodes_per_round = 0;
  int hidden_width = 0;
  int hidden_layers = 0;
  std::uint64_t seed = 0;
  int completion_episode = 0;
  bool capped = false;
  std::int64_t total_uplink_bytes = 0;
  std::int64_t total_downlink_bytes = 0;
};

RunRecord run_cell(const FederationConfig& cfg, std::uint64_t seed);

struct AggregateRow {
  ProtocolKind protocol = ProtocolKind::FRD;
  int agents = 0;
  int sections = 0;
  int episodes_per_round = 0;
  int hidden_width = 0;
  int hidden_layers = 0;
  int runs = 0;
  int capped_runs = 0;
  int median_completion = 0;
  int p25_completion = 0;
  int p75_completion = 0;
};

struct SweepResult {
  std::vector<RunRecord> runs;          // ordered by (agent count, seed)
  std::vector<AggregateRow> aggregates; // one row per agent count
};

// Runs every (agent count, seed) cell; cells execute on the worker pool but
// results are stored in task order, so output is reproducible.
SweepResult sweep(const ExperimentConfig& cfg, const std::vector<int>& agent_counts);

// Nearest-rank percentile: the ceil(p/100 * N)-th smallest value.
int percentile_nearest_rank(std::vector<int> values, double p);

AggregateRow aggregate_records(const std::vector<RunRecord>& records);

// FRDSIM_WORKERS, else hardware concurrency.
int worker_count();

// Runs fn(0..count-1) on worker_count() threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

// CSV columns: protocol,agents,S,E,n,l,seed,completion_episode,capped,
// total_uplink_bytes,total_downlink_bytes. Aggregate CSV mirrors the key
// columns plus runs,capped_runs,median/p25/p75_completion.
void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs);
void write_runs_jsonl(std::ostream& out, const std::vector<RunRecord>& runs);
void write_aggregates_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

void write_runs_csv(const std::string& path, const std::vector<RunRecord>& runs);
void write_runs_jsonl(const std::string& path, const std::vector<RunRecord>& runs);
void write_aggregates_csv(const std::string& path,
                          const std::vector<AggregateRow>& rows);

}  // namespace frd
