#include "evex/explore.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <unordered_set>

namespace evex {

const char *algo_name(Algo a) {
  switch (a) {
  case Algo::emdpor: return "emdpor";
  case Algo::dpor: return "dpor";
  case Algo::brute: return "brute";
  }
  return "?";
}

Algo parse_algo(const std::string &s) {
  if (s == "emdpor") return Algo::emdpor;
  if (s == "dpor") return Algo::dpor;
  if (s == "brute") return Algo::brute;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

namespace {

using Mask = uint64_t;
inline Mask bit(int t) { return Mask{1} << t; }

struct Frame {
  Mask backtrack = 0;
  Mask done = 0;
  Mask enabled = 0;
};

struct PairHash {
  size_t operator()(const std::pair<uint64_t, Uid> &k) const {
    return k.first ^ (static_cast<size_t>(k.second.task) * 0x9e3779b1u) ^
           (static_cast<size_t>(k.second.index) << 20);
  }
};

struct CapExceeded {};

class Explorer {
public:
  Explorer(const Program &p, Algo algo, const ExploreOptions &o)
      : p_(p), algo_(algo), o_(o), dep_(o.dependence(algo != Algo::dpor)), hb_(p, dep_) {
    if (p.num_threads() > 63) throw std::invalid_argument("too many threads");
    stats_.algo = algo;
  }

  ExplorationStats run() {
    auto t0 = std::chrono::steady_clock::now();
    w_ = start_sequence(initial_state(p_));
    frames_.assign(1, Frame{});
    rp_.assign(1, {});
    guided_ = !o_.seed_schedule.empty();
    try {
      explore();
    } catch (const CapExceeded &) {
      stats_.cap_exceeded = true;
    }
    stats_.distinct_transitions = distinct_.size();
    stats_.time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return std::move(stats_);
  }

private:
  const Program &p_;
  Algo algo_;
  ExploreOptions o_;
  DependenceOptions dep_;
  HbTracker hb_;
  Sequence w_;
  std::vector<Frame> frames_;
  RpLog rp_;
  ExplorationStats stats_;
  std::unordered_set<std::pair<uint64_t, Uid>, PairHash> distinct_;
  bool guided_ = false;

  int n() const { return w_.size(); }

  Mask enabled_mask(const State &s) const {
    Mask m = 0;
    for (int t : enabled_threads(p_, s)) m |= bit(t);
    return m;
  }

  static int lowest(Mask m) { return m ? __builtin_ctzll(m) : -1; }

  void add_backtrack(int k, int t) {
    if (o_.truncate_backtrack) return;
    Frame &f = frames_[k];
    if (f.enabled & bit(t)) f.backtrack |= bit(t);
  }

  void add_all_enabled(int k) {
    if (o_.truncate_backtrack) return;
    frames_[k].backtrack |= frames_[k].enabled;
  }

  void add_rp(int k, const Transition &a, const Transition &b) {
    if (a.op.kind != OpKind::post || b.op.kind != OpKind::post) return;
    RpPair pr{a.uid(p_), b.uid(p_)};
    auto &rp = rp_[k];
    if (std::find(rp.begin(), rp.end(), pr) == rp.end()) rp.push_back(pr);
  }

  void record_state(const State &s) {
    for (auto &c : deadlock_cycles(p_, s)) stats_.deadlock_cycles.emplace(cycle_key(p_, c), c);
  }

  void explore() {
    const int d = n();
    const State s = w_.last();
    record_state(s);
    if (algo_ == Algo::emdpor) em_races();
    else if (algo_ == Algo::dpor) dpor_races();

    frames_[d].enabled = enabled_mask(s);
    if (!frames_[d].enabled) {
      leaf();
      return;
    }
    int seed = lowest(frames_[d].enabled);
    if (guided_) {
      if (d < static_cast<int>(o_.seed_schedule.size()) &&
          (frames_[d].enabled & bit(o_.seed_schedule[d])))
        seed = o_.seed_schedule[d];
      else
        guided_ = false;
    }
    frames_[d].backtrack = algo_ == Algo::brute && !o_.truncate_backtrack ? frames_[d].enabled : bit(seed);

    for (;;) {
      Mask todo = frames_[d].backtrack & ~frames_[d].done & frames_[d].enabled;
      if (!todo) break;
      int t = lowest(todo);
      if (frames_[d].done) guided_ = false;
      Transition r = *next_transition(p_, s, t);
      std::optional<int> rp_k;
      if (algo_ == Algo::emdpor && r.op.kind == OpKind::post) {
        rp_k = reordered_post(r);
        if (rp_k) add_backtrack(*rp_k, t);
      }
      std::vector<RpPair> child_rp;
      for (const auto &pr : rp_[d])
        if (!(r.op.kind == OpKind::post && pr.first == r.uid(p_))) child_rp.push_back(pr);
      frames_[d].done |= bit(t);

      if (++stats_.transitions > o_.cap) throw CapExceeded{};
      distinct_.insert({fingerprint(s), r.uid(p_)});
      stats_.first_transitions[fingerprint(s)].insert(r.uid(p_));
      if (r.op.kind == OpKind::assert_op) stats_.asserts.insert(r.op.assert_id);

      append(p_, w_, r);
      hb_.push(r, rp_k);
      frames_.push_back(Frame{});
      rp_.push_back(std::move(child_rp));
      explore();
      frames_.pop_back();
      rp_.pop_back();
      hb_.pop();
      w_.steps.pop_back();
      w_.observed.pop_back();
      w_.states.pop_back();
    }
  }

  void leaf() {
    stats_.traces++;
    guided_ = false;
    if (!o_.record_sequences) return;
    RecordedSequence rec;
    rec.steps = w_.steps;
    rec.observed = w_.observed;
    rec.rp_edges = hb_.reordered_edges();
    if (o_.record_clocks)
      for (int i = 0; i < n(); ++i) rec.clocks.push_back(hb_.clock(i));
    rec.final_state = w_.last();
    stats_.sequences.push_back(std::move(rec));
  }

  std::optional<int> reordered_post(const Transition &r) {
    auto ks = reordered_posts(p_, w_.steps, r, n(), rp_);
    if (ks.empty()) return std::nullopt;
    return ks.back();
  }

  bool may_reorder(const Transition &a, const Transition &b) const {
    if (a.thread() != b.thread() || a.event() < 0 || b.event() < 0 || a.event() == b.event())
      return false;
    auto pa = w_.post_of(a.event()), pb = w_.post_of(b.event());
    if (!pa || !pb) return false;
    return !hb_.hb(*pa, *pb) && !hb_.hb(*pb, *pa);
  }

  bool races(int i, const Transition &r) const {
    const Transition &a = w_.steps[i];
    return is_dependent(a, r, dep_) && (may_be_coenabled(a, r) || may_reorder(a, r)) &&
           !hb_.hb_task(i, r);
  }

  void em_races() {
    const State &s = w_.last();
    for (int t = 0; t < p_.num_threads(); ++t) {
      auto nx = next_transition(p_, s, t);
      if (!nx) continue;
      const Transition r = *nx;
      int i = -1;
      for (int k = n() - 1; k >= 0; --k)
        if (races(k, r)) {
          i = k;
          break;
        }
      if (i >= 0) {
        find_target(i, r);
        if (dep_.read_read_indep && r.op.kind == OpKind::write) {
          int lw = -1;
          for (int k = n() - 1; k >= 0; --k)
            if (w_.steps[k].op.kind == OpKind::write && w_.steps[k].op.var == r.op.var) {
              lw = k;
              break;
            }
          hb_.push_temp_edge(i, r);
          for (int j = std::max(lw, 0); j < n(); ++j)
            if (races(j, r)) find_target(j, r);
          hb_.pop_temp_edge();
        }
      }
      if (dep_.lock_indep && r.op.kind == OpKind::lock) lock_fanout(r);
    }
  }

  void lock_fanout(const Transition &r) {
    int j = -1;
    for (int k = n() - 1; k >= 0; --k) {
      const auto &a = w_.steps[k];
      if (a.op.kind == OpKind::lock && a.op.lock == r.op.lock && a.thread() != r.thread() &&
          !hb_.hb_task(k, r)) {
        j = k;
        break;
      }
    }
    if (j < 0) return;
    find_target(j, r);
    const Transition &rj = w_.steps[j];
    if (rj.event() < 0) return;
    hb_.push_temp_edge(j, r);
    for (int k = j - 1; k >= 0; --k) {
      const auto &a = w_.steps[k];
      if (a.op.kind != OpKind::lock || a.op.lock != r.op.lock) continue;
      if (a.thread() != rj.thread()) break;
      if (a.event() >= 0 && !hb_.hb_task(k, r)) find_target(k, r);
    }
    hb_.pop_temp_edge();
  }

  void dpor_races() {
    const State &s = w_.last();
    for (int t = 0; t < p_.num_threads(); ++t) {
      auto nx = next_transition(p_, s, t);
      if (!nx) continue;
      const Transition r = *nx;
      for (int i = n() - 1; i >= 0; --i) {
        const Transition &a = w_.steps[i];
        if (!is_dependent(a, r, dep_) || !may_be_coenabled(a, r) || hb_.hb_task(i, r)) continue;
        Mask cand = 0;
        const Mask en = frames_[i].enabled;
        if (en & bit(t)) cand |= bit(t);
        for (int j = i + 1; j < n(); ++j)
          if (hb_.hb_task(j, r) && (en & bit(w_.steps[j].thread()))) cand |= bit(w_.steps[j].thread());
        if (cand) add_backtrack(i, lowest(cand));
        else add_all_enabled(i);
        break;
      }
    }
  }

  // Membership of a task in the executable or blocked tasks at s.
  static bool task_present(const State &s, const TaskId &task) {
    if (task.event < 0) return true;
    if (executable_event(s, task.thread) == task.event) return true;
    for (int e : blocked_events(s, task.thread))
      if (e == task.event) return true;
    return false;
  }

  static bool is_blocked_task(const State &s, const TaskId &task) {
    if (task.event < 0) return false;
    for (int e : blocked_events(s, task.thread))
      if (e == task.event) return true;
    return false;
  }

  void find_target(int i, const Transition &r2) {
    const Transition r = w_.steps[i];
    auto j2 = w_.index_of(r2);
    if (j2 && hb_.hb(i, *j2)) return;
    if (r.task == r2.task) return;
    if (r.thread() == r2.thread()) {
      if (r.event() < 0 || r2.event() < 0) return;
      auto a = w_.post_of(r.event()), b = w_.post_of(r2.event());
      if (a && b) find_target(*a, w_.steps[*b]);
      return;
    }
    const State &s = w_.states[i];
    const Frame &F = frames_[i];
    auto after = [&](int k) { return j2 ? hb_.hb(k, *j2) : hb_.hb_task(k, r2); };

    std::vector<TaskId> cands;
    auto consider = [&](const TaskId &task) {
      if (!(F.enabled & bit(task.thread)) || !task_present(s, task)) return;
      if (std::find(cands.begin(), cands.end(), task) == cands.end()) cands.push_back(task);
    };
    consider(r2.task);
    const int end = j2 ? *j2 : n();
    for (int k = i + 1; k < end; ++k)
      if (after(k)) consider(w_.steps[k].task);

    Mask threads = 0;
    for (const auto &c : cands) threads |= bit(c.thread);
    if (Mask fresh = threads & ~F.done) {
      add_backtrack(i, lowest(fresh));
      add_rp(i, r, r2);
      return;
    }
    std::vector<TaskId> pending;
    for (const auto &c : cands)
      if (is_blocked_task(s, c)) pending.push_back(c);
    if (!pending.empty()) reschedule_pending(i, pending);
    else if (threads) add_backtrack(i, lowest(threads));
    else backtrack_eager(i, r2);
  }

  int post_index(int event) const {
    auto k = w_.post_of(event);
    return k ? *k : -1;
  }

  void reschedule_pending(int i, std::vector<TaskId> pending) {
    const State &s = w_.states[i];
    const Mask done = frames_[i].done;
    std::sort(pending.begin(), pending.end(), [&](const TaskId &a, const TaskId &b) {
      if (a.thread != b.thread) return a.thread < b.thread;
      return post_index(a.event) < post_index(b.event);
    });
    const TaskId first = pending.front();
    std::map<int, std::set<int>> swap;
    swap[first.thread].insert(first.event);
    std::vector<int> work{first.thread};
    Mask seen = bit(first.thread);
    while (!work.empty()) {
      int tj = work.back();
      work.pop_back();
      int ej = executable_event(s, tj);
      if (ej < 0) continue;
      int last = -1;
      for (int l = 0; l < n(); ++l)
        if (w_.steps[l].task == TaskId{tj, ej}) last = l;
      if (last < 0) continue;
      for (int l = 0; l < n(); ++l) {
        const TaskId task = w_.steps[l].task;
        if (!(done & bit(task.thread)) || !is_blocked_task(s, task)) continue;
        if (l != last && !hb_.hb(l, last)) continue;
        swap[task.thread].insert(task.event);
        if (!(seen & bit(task.thread))) {
          seen |= bit(task.thread);
          work.push_back(task.thread);
        }
      }
    }
    for (const auto &[t, evs] : swap) {
      int e = *std::min_element(evs.begin(), evs.end(),
                                [&](int a, int b) { return post_index(a) < post_index(b); });
      int a = post_index(executable_event(s, t)), b = post_index(e);
      if (a >= 0 && b >= 0) find_target(a, w_.steps[b]);
    }
  }

  void backtrack_eager(int i, const Transition &r2) {
    auto j2 = w_.index_of(r2);
    const int N = n();
    const int target = j2 ? *j2 : N; // node N stands for the task of a pending r2
    std::vector<std::vector<char>> M(N + 1, std::vector<char>(N + 1, 0));
    for (int a = 0; a < N; ++a) {
      for (int b = a + 1; b < N; ++b) M[a][b] = hb_.hb(a, b);
      if (!j2) M[a][N] = hb_.hb_task(a, r2);
    }
    auto add_edge = [&](int from, int to) {
      std::vector<int> srcs{from}, dsts{to};
      for (int a = 0; a <= N; ++a)
        if (M[a][from]) srcs.push_back(a);
      for (int b = 0; b <= N; ++b)
        if (M[to][b]) dsts.push_back(b);
      for (int a : srcs)
        for (int b : dsts) M[a][b] = 1;
    };
    auto find_op = [&](OpKind kind, int event) {
      for (int x = 0; x < N; ++x)
        if (w_.steps[x].op.kind == kind && w_.steps[x].op.event == event) return x;
      return -1;
    };
    auto close_fifo = [&] {
      for (bool changed = true; changed;) {
        changed = false;
        for (int a = 0; a < N; ++a) {
          if (w_.steps[a].op.kind != OpKind::post) continue;
          for (int b = a + 1; b < N; ++b) {
            if (!M[a][b] || w_.steps[b].op.kind != OpKind::post || w_.steps[a].op.dest != w_.steps[b].op.dest)
              continue;
            int e = find_op(OpKind::end, w_.steps[a].op.event);
            int g = find_op(OpKind::begin, w_.steps[b].op.event);
            if (e >= 0 && g >= 0 && !M[e][g]) {
              add_edge(e, g);
              changed = true;
            }
          }
        }
      }
    };

    for (int k = 1; k < i; ++k) {
      const Transition &rk = w_.steps[k];
      if (rk.op.kind != OpKind::post) continue;
      int j = -1;
      for (int x = k - 1; x >= 0; --x)
        if (w_.steps[x].op.kind == OpKind::post && w_.steps[x].op.dest == rk.op.dest && !M[x][k]) {
          j = x;
          break;
        }
      if (j < 0) continue;
      const Mask en = frames_[j].enabled;
      Mask ts = en & bit(rk.thread());
      for (int l = j + 1; l < k; ++l)
        if (M[l][k] && (en & bit(w_.steps[l].thread()))) ts |= bit(w_.steps[l].thread());
      if (ts) add_backtrack(j, lowest(ts));
      else add_all_enabled(j);
      add_rp(j, w_.steps[j], rk);
      add_edge(j, k);
      close_fifo();
      if (M[i][target]) return;
    }
    const Mask en = frames_[i].enabled;
    Mask cand = en & bit(r2.thread());
    for (int l = i + 1; l < N; ++l)
      if (M[l][target] && (en & bit(w_.steps[l].thread()))) cand |= bit(w_.steps[l].thread());
    if (cand) add_backtrack(i, lowest(cand));
    else add_all_enabled(i);
    add_rp(i, w_.steps[i], r2);
  }
};

} // namespace

ExplorationStats explore(const Program &p, Algo algo, const ExploreOptions &o) {
  return Explorer(p, algo, o).run();
}

} // namespace evex
