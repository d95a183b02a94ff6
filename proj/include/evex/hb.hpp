#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "evex/state.hpp"

namespace evex {

struct DependenceOptions {
  bool read_read_indep = false;
  bool lock_indep = false;
  bool fork_hb = true;
  /// false selects the multi-threaded baseline relation: posts to the same
  /// queue conflict and each thread is totally ordered.
  bool event_model = true;
};

bool is_dependent(const Transition &a, const Transition &b, const DependenceOptions &o);
/// a enables b: Post(e)/Begin(e) or Fork(t)/Init(t).
bool is_enabling_pair(const Transition &a, const Transition &b);
bool may_be_coenabled(const Transition &a, const Transition &b);

/// An executed sequence together with every intermediate state:
/// states[i] is the state before steps[i], states.back() is last(w).
struct Sequence {
  std::vector<Transition> steps;
  std::vector<int64_t> observed;
  std::vector<State> states;

  int size() const { return static_cast<int>(steps.size()); }
  const State &last() const { return states.back(); }
  std::optional<int> index_of(const Transition &r) const;
  std::optional<int> post_of(int event) const;
};

Sequence start_sequence(const State &s);
void append(const Program &p, Sequence &w, const Transition &r);
/// Replays transitions from s; throws std::invalid_argument when one is
/// not enabled.
Sequence replay(const Program &p, const State &s, const std::vector<Transition> &ts);
/// Replays by thread choice, one executed transition per entry.
Sequence replay_threads(const Program &p, const State &s, const std::vector<int> &threads);

using Clock = std::vector<uint32_t>;

/// Incremental happens-before over a growing sequence. With event_model the
/// clock components are tasks, otherwise threads.
class HbTracker {
public:
  HbTracker(const Program &p, DependenceOptions o);

  void push(const Transition &r, std::optional<int> reordered_post = std::nullopt);
  void pop();
  void clear();

  int size() const { return static_cast<int>(steps_.size()); }
  const Transition &at(int i) const { return steps_[i]; }
  const Clock &clock(int i) const { return clocks_[i]; }
  const DependenceOptions &options() const { return opts_; }

  bool hb(int i, int j) const;
  /// i happens before the task (or thread) that t belongs to, counting edges
  /// that create it and any temporary edges in force.
  bool hb_task(int i, const Transition &t) const;

  void push_temp_edge(int from, const Transition &to);
  void pop_temp_edge();

  int component(const Transition &t) const;
  const std::vector<std::pair<int, int>> &reordered_edges() const { return rp_edges_; }

private:
  const Program *p_;
  DependenceOptions opts_;
  int ncomp_;
  std::vector<Transition> steps_;
  std::vector<Clock> clocks_;
  std::vector<std::vector<Clock>> live_; // live_[k] = table before step k; back() is current
  std::vector<std::pair<int, int>> rp_edges_;
  std::vector<std::pair<int, int>> temp_; // (source index, component)
};

/// Ordered pair of posts recorded at a state when choices were added to run
/// the second before the first.
struct RpPair {
  Uid first, second;
  bool operator==(const RpPair &) const = default;
};
/// RP sets of the states along a sequence: entry m belongs to the state
/// before step m.
using RpLog = std::vector<std::vector<RpPair>>;

/// Indices k < at of posts w[k] that were recorded together with p at some
/// state m <= k of the prefix.
std::vector<int> reordered_posts(const Program &p, const std::vector<Transition> &w, const Transition &post,
                                 int at, const RpLog &rp);

/// Definitional closure of the four ordering rules; rp_edges lists the
/// (k, j) reordered-post edges.
std::vector<std::vector<bool>> hb_oracle(const std::vector<Transition> &w,
                                         const std::vector<std::pair<int, int>> &rp_edges,
                                         const DependenceOptions &o);

/// Indices of the posts leading to r's handler, outermost first. r is either
/// a step of w or a transition pending at last(w).
std::vector<int> post_chain(const Sequence &w, const Transition &r);
std::optional<std::pair<int, int>> diverging_posts(const Sequence &w, const Transition &r,
                                                    const Transition &r2);

} // namespace evex
