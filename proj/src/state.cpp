#include "evex/state.hpp"

#include <algorithm>
#include <cassert>

namespace evex {

TaskId task_at(const Program &p, int index) {
  if (index < p.num_threads()) return {index, -1};
  int e = index - p.num_threads();
  return {p.event_dest[e], e};
}

std::string label(const Program &p, const Transition &t) {
  std::string s = p.threads[t.thread()].id;
  if (t.event() >= 0) s += ":" + p.event_names[t.event()];
  s += "#" + std::to_string(t.index) + " " + p.describe(t.op);
  return s;
}

static inline void mix(uint64_t &h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}

uint64_t fingerprint(const State &s) {
  uint64_t h = 1469598103934665603ULL;
  for (const auto &t : s.threads) {
    mix(h, static_cast<uint64_t>(t.status));
    mix(h, static_cast<uint64_t>(t.pc));
    mix(h, static_cast<uint64_t>(t.event + 1));
  }
  for (const auto &q : s.queues) {
    mix(h, q.size());
    for (int e : q) mix(h, static_cast<uint64_t>(e));
  }
  for (int o : s.lock_owner) mix(h, static_cast<uint64_t>(o + 1));
  for (int64_t v : s.store) mix(h, static_cast<uint64_t>(v));
  return h;
}

State initial_state(const Program &p) {
  State s;
  s.threads.resize(p.threads.size());
  for (size_t t = 0; t < p.threads.size(); ++t) {
    const auto &spec = p.threads[t];
    auto &ts = s.threads[t];
    if (spec.queue) ts.status = Status::idle;
    else if (spec.forked) ts.status = Status::not_forked;
    else ts.status = spec.script.empty() ? Status::finished : Status::running;
  }
  s.queues.resize(p.threads.size());
  s.lock_owner.assign(p.lock_names.size(), -1);
  s.store = p.var_init;
  return s;
}

std::optional<Transition> next_transition(const Program &p, const State &s, int t) {
  const auto &ts = s.threads[t];
  switch (ts.status) {
  case Status::finished: return std::nullopt;
  case Status::not_forked: return Transition{{t, -1}, 0, p.threads[t].script[0]};
  case Status::running: return Transition{{t, -1}, ts.pc, p.threads[t].script[ts.pc]};
  case Status::idle: {
    if (s.queues[t].empty()) return std::nullopt;
    int e = s.queues[t].front();
    Operation op;
    op.kind = OpKind::begin;
    op.event = e;
    return Transition{{t, e}, 0, op};
  }
  case Status::in_handler: {
    const auto &h = p.handlers[ts.event];
    if (ts.pc <= static_cast<int>(h.size())) return Transition{{t, ts.event}, ts.pc, h[ts.pc - 1]};
    Operation op;
    op.kind = OpKind::end;
    op.event = ts.event;
    return Transition{{t, ts.event}, ts.pc, op};
  }
  }
  return std::nullopt;
}

bool is_enabled(const Program &p, const State &s, const Transition &r) {
  auto n = next_transition(p, s, r.thread());
  if (!n || !(*n == r)) return false;
  if (s.threads[r.thread()].status == Status::not_forked) return false;
  if (r.op.kind == OpKind::lock) return s.lock_owner[r.op.lock] < 0;
  return true;
}

std::vector<int> enabled_threads(const Program &p, const State &s) {
  std::vector<int> out;
  for (int t = 0; t < p.num_threads(); ++t) {
    auto n = next_transition(p, s, t);
    if (n && is_enabled(p, s, *n)) out.push_back(t);
  }
  return out;
}

std::vector<Transition> next_transitions(const Program &p, const State &s) {
  std::vector<Transition> out;
  for (int t = 0; t < p.num_threads(); ++t)
    if (auto n = next_transition(p, s, t)) out.push_back(*n);
  return out;
}

Executed execute(const Program &p, const State &s, const Transition &r) {
  assert(is_enabled(p, s, r));
  Executed ex{s, 0};
  State &n = ex.state;
  auto &ts = n.threads[r.thread()];
  const Operation &op = r.op;
  switch (op.kind) {
  case OpKind::post: n.queues[op.dest].push_back(op.event); break;
  case OpKind::read: ex.observed = n.store[op.var]; break;
  case OpKind::write: n.store[op.var] = op.val; break;
  case OpKind::lock: n.lock_owner[op.lock] = r.thread(); break;
  case OpKind::unlock: n.lock_owner[op.lock] = -1; break;
  case OpKind::fork: {
    auto &child = n.threads[op.thread];
    child.status = Status::running;
    child.pc = 0;
    break;
  }
  default: break;
  }
  if (op.kind == OpKind::begin) {
    n.queues[r.thread()].erase(n.queues[r.thread()].begin());
    ts.status = Status::in_handler;
    ts.event = op.event;
    ts.pc = 1;
  } else if (op.kind == OpKind::end) {
    ts.status = Status::idle;
    ts.event = -1;
    ts.pc = 0;
  } else if (r.event() >= 0) {
    ts.pc++;
  } else {
    ts.pc++;
    if (ts.pc >= static_cast<int>(p.threads[r.thread()].script.size())) ts.status = Status::finished;
  }
  n.executed++;
  return ex;
}

int executable_event(const State &s, int t) {
  const auto &ts = s.threads[t];
  if (ts.status == Status::in_handler) return ts.event;
  if (ts.status == Status::idle && !s.queues[t].empty()) return s.queues[t].front();
  return -1;
}

std::vector<int> blocked_events(const State &s, int t) {
  const auto &q = s.queues[t];
  if (s.threads[t].status == Status::in_handler) return q;
  if (q.empty()) return {};
  return {q.begin() + 1, q.end()};
}

std::vector<DeadlockCycle> deadlock_cycles(const Program &p, const State &s) {
  int n = p.num_threads();
  std::vector<int> waits_on(n, -1);
  std::vector<std::optional<Transition>> nexts(n);
  for (int t = 0; t < n; ++t) {
    nexts[t] = next_transition(p, s, t);
    if (nexts[t] && nexts[t]->op.kind == OpKind::lock && s.threads[t].status != Status::not_forked) {
      int owner = s.lock_owner[nexts[t]->op.lock];
      if (owner >= 0) waits_on[t] = owner;
    }
  }
  std::vector<DeadlockCycle> out;
  std::vector<int> mark(n, 0); // 0 new, 1 on current walk, 2 finished
  for (int start = 0; start < n; ++start) {
    if (mark[start]) continue;
    std::vector<int> walk;
    int t = start;
    while (t >= 0 && mark[t] == 0) {
      mark[t] = 1;
      walk.push_back(t);
      t = waits_on[t];
    }
    if (t >= 0 && mark[t] == 1) {
      auto it = std::find(walk.begin(), walk.end(), t);
      std::vector<int> cyc(it, walk.end());
      std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
      DeadlockCycle c;
      for (int u : cyc) c.members.push_back(*nexts[u]);
      out.push_back(std::move(c));
    }
    for (int u : walk) mark[u] = 2;
  }
  return out;
}

std::vector<Uid> cycle_key(const Program &p, const DeadlockCycle &c) {
  std::vector<Uid> k;
  for (const auto &m : c.members) k.push_back(m.uid(p));
  return k;
}

} // namespace evex
