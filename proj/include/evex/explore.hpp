#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "evex/hb.hpp"

namespace evex {

enum class Algo { emdpor, dpor, brute };

const char *algo_name(Algo a);
Algo parse_algo(const std::string &s);

struct ExploreOptions {
  bool read_read_indep = false;
  bool lock_indep = false;
  bool fork_hb = true;
  uint64_t cap = 2'000'000; // transitions executed before giving up
  /// Test hook: keep only the initial choice at every state.
  bool truncate_backtrack = false;
  /// Thread choices for the first descent, by thread index.
  std::vector<int> seed_schedule;
  bool record_sequences = false;
  bool record_clocks = false;

  DependenceOptions dependence(bool event_model) const {
    return {read_read_indep, lock_indep, fork_hb, event_model};
  }
};

struct RecordedSequence {
  std::vector<Transition> steps;
  std::vector<int64_t> observed;
  std::vector<std::pair<int, int>> rp_edges;
  std::vector<Clock> clocks;
  State final_state;
};

struct ExplorationStats {
  Algo algo = Algo::emdpor;
  uint64_t traces = 0;
  uint64_t transitions = 0;
  uint64_t distinct_transitions = 0;
  double time_ms = 0;
  bool cap_exceeded = false;
  std::map<std::vector<Uid>, DeadlockCycle> deadlock_cycles;
  std::set<int> asserts;
  std::map<uint64_t, std::set<Uid>> first_transitions; // keyed by state fingerprint
  std::vector<RecordedSequence> sequences;
};

ExplorationStats explore(const Program &p, Algo algo, const ExploreOptions &o = {});

} // namespace evex
