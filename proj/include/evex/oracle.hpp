#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evex/explore.hpp"

namespace evex {

struct SpaceCapExceeded : std::runtime_error {
  explicit SpaceCapExceeded(uint64_t cap)
      : std::runtime_error("state space exceeds " + std::to_string(cap) + " transitions") {}
};

using Path = std::vector<Transition>;

/// Every maximal transition sequence from s. Throws SpaceCapExceeded once
/// more than cap transitions have been executed.
std::vector<Path> enumerate_all(const Program &p, const State &s, uint64_t cap = 2'000'000);
/// One maximal sequence per equivalence class of the baseline relation,
/// where adjacent independent transitions commute. Coverage verdicts are the
/// same for every member of a class, so the verifier only needs these.
std::vector<Path> enumerate_representatives(const Program &p, const State &s, uint64_t cap = 2'000'000);

struct CoverResult {
  bool ok = true;
  std::string reason;
  explicit operator bool() const { return ok; }
};

/// Whether u (from s) is dependence-covering for w (from s).
CoverResult is_dependence_covering(const Program &p, const State &s, const Path &u, const Path &w,
                                   const DependenceOptions &o);

struct DcsReport {
  bool ok = true;
  uint64_t states_checked = 0;
  uint64_t sequences_checked = 0;
  std::string witness; // first failure, human readable
};

/// Checks, at every state visited by the explored sequences, that each
/// maximal sequence from that state has an explored dependence-covering one.
/// Unless every_interleaving is set, maximal sequences are drawn one per
/// class from enumerate_representatives.
DcsReport verify_dcs(const Program &p, const std::vector<Path> &explored, const DependenceOptions &o,
                     uint64_t cap = 2'000'000, bool every_interleaving = false);

/// Whether the first transitions in firsts form a covering set at s, taking
/// any sequence of the full space as a candidate.
DcsReport check_covering_set(const Program &p, const State &s, const std::vector<Transition> &firsts,
                             const DependenceOptions &o, uint64_t cap = 2'000'000);

struct GenCaps {
  int max_threads = 4;
  int max_events = 6;
  int max_ops = 12;
  int max_vars = 3;
  int max_locks = 2;
};

Program gen_random(uint64_t seed, const GenCaps &caps = {});
/// Two posts to the same queue issued from different tasks.
bool has_post_race(const Program &p);

} // namespace evex
