#pragma once

#include <vector>

#include "frd/cartpole.hpp"

namespace frd {

// One raw experience record: the observed state together with the action
// distribution that was in force when the action was sampled.
struct ReplayEntry {
  EnvState state;
  PolicyPair policy;
};

// Raw replay memory. Grows without bound within a communication period and
// is cleared at every federation barrier after upload.
struct ReplayMemory {
  std::vector<ReplayEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  void add(const EnvState& state, const PolicyPair& policy) {
    entries.push_back({state, policy});
  }
  void clear() { entries.clear(); }
};

}  // namespace frd
