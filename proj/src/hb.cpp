#include "evex/hb.hpp"

#include <algorithm>
#include <stdexcept>

namespace evex {

static bool is_mem(OpKind k) { return k == OpKind::read || k == OpKind::write; }
static bool is_lockish(OpKind k) { return k == OpKind::lock || k == OpKind::unlock; }

bool is_enabling_pair(const Transition &a, const Transition &b) {
  auto one_way = [](const Transition &x, const Transition &y) {
    if (x.op.kind == OpKind::post && y.op.kind == OpKind::begin) return x.op.event == y.op.event;
    if (x.op.kind == OpKind::fork && y.op.kind == OpKind::init) return x.op.thread == y.thread();
    return false;
  };
  return one_way(a, b) || one_way(b, a);
}

bool is_dependent(const Transition &a, const Transition &b, const DependenceOptions &o) {
  if (a.task == b.task) return true;
  if (!o.event_model && a.thread() == b.thread()) return true;
  const Operation &x = a.op, &y = b.op;
  if (is_mem(x.kind) && is_mem(y.kind)) {
    if (x.var != y.var) return false;
    if (x.kind == OpKind::read && y.kind == OpKind::read) return !o.read_read_indep;
    return true;
  }
  if (is_lockish(x.kind) && is_lockish(y.kind)) {
    if (x.lock != y.lock) return false;
    if (x.kind == OpKind::unlock && y.kind == OpKind::unlock) return false;
    if (o.lock_indep && o.event_model && a.thread() == b.thread() && a.event() >= 0 && b.event() >= 0)
      return false;
    return true;
  }
  if (x.kind == OpKind::fork || y.kind == OpKind::fork) return o.fork_hb && is_enabling_pair(a, b);
  if (is_enabling_pair(a, b)) return true;
  if (!o.event_model && x.kind == OpKind::post && y.kind == OpKind::post) return x.dest == y.dest;
  return false;
}

bool may_be_coenabled(const Transition &a, const Transition &b) {
  return a.thread() != b.thread() && !is_enabling_pair(a, b);
}

std::optional<int> Sequence::index_of(const Transition &r) const {
  for (int i = 0; i < size(); ++i)
    if (steps[i] == r) return i;
  return std::nullopt;
}

std::optional<int> Sequence::post_of(int event) const {
  for (int i = 0; i < size(); ++i)
    if (steps[i].op.kind == OpKind::post && steps[i].op.event == event) return i;
  return std::nullopt;
}

Sequence start_sequence(const State &s) {
  Sequence w;
  w.states.push_back(s);
  return w;
}

void append(const Program &p, Sequence &w, const Transition &r) {
  auto ex = execute(p, w.last(), r);
  w.steps.push_back(r);
  w.observed.push_back(ex.observed);
  w.states.push_back(std::move(ex.state));
}

Sequence replay(const Program &p, const State &s, const std::vector<Transition> &ts) {
  Sequence w = start_sequence(s);
  for (const auto &r : ts) {
    if (!is_enabled(p, w.last(), r)) throw std::invalid_argument("not enabled: " + label(p, r));
    append(p, w, r);
  }
  return w;
}

Sequence replay_threads(const Program &p, const State &s, const std::vector<int> &threads) {
  Sequence w = start_sequence(s);
  for (int t : threads) {
    auto r = next_transition(p, w.last(), t);
    if (!r || !is_enabled(p, w.last(), *r))
      throw std::invalid_argument("thread " + p.threads[t].id + " is not enabled");
    append(p, w, *r);
  }
  return w;
}

static void join(Clock &a, const Clock &b) {
  for (size_t i = 0; i < a.size(); ++i) a[i] = std::max(a[i], b[i]);
}

HbTracker::HbTracker(const Program &p, DependenceOptions o)
    : p_(&p), opts_(o), ncomp_(o.event_model ? p.num_tasks() : p.num_threads()) {
  clear();
}

void HbTracker::clear() {
  steps_.clear();
  clocks_.clear();
  rp_edges_.clear();
  temp_.clear();
  live_.assign(1, std::vector<Clock>(ncomp_, Clock(ncomp_, 0)));
}

int HbTracker::component(const Transition &t) const {
  return opts_.event_model ? task_index(*p_, t.task) : t.thread();
}

void HbTracker::push(const Transition &r, std::optional<int> reordered_post) {
  const int n = size();
  const int c = component(r);
  Clock v = live_.back()[c];
  for (int i = 0; i < n; ++i)
    if (is_dependent(steps_[i], r, opts_)) join(v, clocks_[i]);
  if (opts_.event_model && r.op.kind == OpKind::begin) {
    int mypost = -1;
    for (int i = 0; i < n; ++i)
      if (steps_[i].op.kind == OpKind::post && steps_[i].op.event == r.op.event) mypost = i;
    for (int i = 0; i < n && mypost >= 0; ++i) {
      if (steps_[i].op.kind != OpKind::end || steps_[i].thread() != r.thread()) continue;
      for (int k = 0; k < n; ++k)
        if (steps_[k].op.kind == OpKind::post && steps_[k].op.event == steps_[i].op.event &&
            hb(k, mypost))
          join(v, clocks_[i]);
    }
  }
  if (reordered_post) {
    join(v, clocks_[*reordered_post]);
    rp_edges_.push_back({*reordered_post, n});
  }
  v[c]++;
  auto table = live_.back();
  table[c] = v;
  if (opts_.event_model && r.op.kind == OpKind::post)
    join(table[task_index(*p_, {r.op.dest, r.op.event})], v);
  if (r.op.kind == OpKind::fork && opts_.fork_hb) join(table[r.op.thread], v);
  steps_.push_back(r);
  clocks_.push_back(std::move(v));
  live_.push_back(std::move(table));
}

void HbTracker::pop() {
  const int n = size() - 1;
  if (!rp_edges_.empty() && rp_edges_.back().second == n) rp_edges_.pop_back();
  steps_.pop_back();
  clocks_.pop_back();
  live_.pop_back();
}

bool HbTracker::hb(int i, int j) const {
  if (i >= j) return false;
  int ci = component(steps_[i]);
  return clocks_[j][ci] >= clocks_[i][ci];
}

bool HbTracker::hb_task(int i, const Transition &t) const {
  int ci = component(steps_[i]);
  int c = component(t);
  if (live_.back()[c][ci] >= clocks_[i][ci]) return true;
  for (auto [src, comp] : temp_)
    if (comp == c && (src == i || hb(i, src))) return true;
  return false;
}

void HbTracker::push_temp_edge(int from, const Transition &to) { temp_.push_back({from, component(to)}); }
void HbTracker::pop_temp_edge() { temp_.pop_back(); }

std::vector<std::vector<bool>> hb_oracle(const std::vector<Transition> &w,
                                         const std::vector<std::pair<int, int>> &rp_edges,
                                         const DependenceOptions &o) {
  const int n = static_cast<int>(w.size());
  std::vector<std::vector<bool>> R(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (is_dependent(w[i], w[j], o)) R[i][j] = true;
  for (auto [k, j] : rp_edges) R[k][j] = true;

  auto find = [&](OpKind kind, int event) {
    for (int i = 0; i < n; ++i)
      if (w[i].op.kind == kind && w[i].op.event == event) return i;
    return -1;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        if (R[i][k])
          for (int j = 0; j < n; ++j)
            if (R[k][j] && !R[i][j]) R[i][j] = true;
    if (!o.event_model) break;
    for (int a = 0; a < n; ++a) {
      if (w[a].op.kind != OpKind::post) continue;
      for (int b = 0; b < n; ++b) {
        if (!R[a][b] || w[b].op.kind != OpKind::post || w[a].op.dest != w[b].op.dest) continue;
        int end = find(OpKind::end, w[a].op.event);
        int beg = find(OpKind::begin, w[b].op.event);
        if (end >= 0 && beg >= 0 && !R[end][beg]) {
          R[end][beg] = true;
          changed = true;
        }
      }
    }
  }
  return R;
}

std::vector<int> reordered_posts(const Program &p, const std::vector<Transition> &w, const Transition &post,
                                 int at, const RpLog &rp) {
  std::vector<int> out;
  const Uid u = post.uid(p);
  for (int m = 0; m <= at && m < static_cast<int>(rp.size()); ++m)
    for (const auto &pr : rp[m]) {
      if (!(pr.first == u)) continue;
      for (int k = m; k < at; ++k)
        if (w[k].uid(p) == pr.second) out.push_back(k);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> post_chain(const Sequence &w, const Transition &r) {
  std::vector<int> chain;
  int e = r.event();
  while (e >= 0) {
    auto k = w.post_of(e);
    if (!k) break;
    chain.push_back(*k);
    e = w.steps[*k].event();
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::optional<std::pair<int, int>> diverging_posts(const Sequence &w, const Transition &r,
                                                    const Transition &r2) {
  auto a = post_chain(w, r), b = post_chain(w, r2);
  std::reverse(a.begin(), a.end());
  std::reverse(b.begin(), b.end());
  for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
    const auto &p = w.steps[a[i]], &q = w.steps[b[i]];
    if (p.task == q.task) return std::nullopt;
    if (p.thread() != q.thread()) return std::pair{a[i], b[i]};
  }
  return std::nullopt;
}

} // namespace evex
