#include "evex/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace evex {

std::vector<Path> enumerate_all(const Program &p, const State &s, uint64_t cap) {
  std::vector<Path> out;
  Path cur;
  uint64_t used = 0;
  std::function<void(const State &)> go = [&](const State &st) {
    auto en = enabled_threads(p, st);
    if (en.empty()) {
      out.push_back(cur);
      return;
    }
    for (int t : en) {
      if (++used > cap) throw SpaceCapExceeded(cap);
      Transition r = *next_transition(p, st, t);
      cur.push_back(r);
      go(execute(p, st, r).state);
      cur.pop_back();
    }
  };
  go(s);
  return out;
}

std::vector<Path> enumerate_representatives(const Program &p, const State &s, uint64_t cap) {
  // Sleep sets over the baseline relation, whose independent pairs commute.
  const DependenceOptions dep{false, false, true, false};
  std::vector<Path> out;
  Path cur;
  uint64_t used = 0;
  std::function<void(const State &, const std::vector<Transition> &)> go =
      [&](const State &st, const std::vector<Transition> &sleep) {
        auto en = enabled_threads(p, st);
        if (en.empty()) {
          out.push_back(cur);
          return;
        }
        std::vector<Transition> done;
        for (int t : en) {
          Transition r = *next_transition(p, st, t);
          if (std::find(sleep.begin(), sleep.end(), r) != sleep.end()) continue;
          if (++used > cap) throw SpaceCapExceeded(cap);
          std::vector<Transition> child;
          for (const auto &x : sleep)
            if (!is_dependent(x, r, dep)) child.push_back(x);
          for (const auto &x : done)
            if (!is_dependent(x, r, dep)) child.push_back(x);
          cur.push_back(r);
          go(execute(p, st, r).state, child);
          cur.pop_back();
          done.push_back(r);
        }
      };
  go(s, {});
  return out;
}

namespace {

// Can some extension of s execute a before b?
bool can_run_before(const Program &p, const State &s, const Transition &a, const Transition &b) {
  std::unordered_set<State, StateHash> seen;
  std::vector<State> stack{s};
  while (!stack.empty()) {
    State st = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(st).second) continue;
    for (int t : enabled_threads(p, st)) {
      Transition r = *next_transition(p, st, t);
      if (r == a) return true;
      if (r == b) continue;
      stack.push_back(execute(p, st, r).state);
    }
  }
  return false;
}

} // namespace

CoverResult is_dependence_covering(const Program &p, const State &s, const Path &u, const Path &w,
                                   const DependenceOptions &o) {
  Sequence W = replay(p, s, w);
  auto nexts = next_transitions(p, W.last());
  auto in_next = [&](const Transition &r) {
    return std::find(nexts.begin(), nexts.end(), r) != nexts.end();
  };
  auto pos_w = [&](const Transition &r) -> int {
    auto k = W.index_of(r);
    return k ? *k : -1;
  };
  for (const auto &r : w)
    if (std::find(u.begin(), u.end(), r) == u.end())
      return {false, "missing " + label(p, r)};
  std::vector<int> pw(u.size());
  for (size_t i = 0; i < u.size(); ++i) pw[i] = pos_w(u[i]);
  for (size_t i = 0; i < u.size(); ++i)
    for (size_t j = i + 1; j < u.size(); ++j) {
      if (!is_dependent(u[i], u[j], o)) continue;
      bool iw = pw[i] >= 0, jw = pw[j] >= 0;
      if (iw && jw) {
        if (pw[i] < pw[j]) continue;
      } else if (iw && in_next(u[j])) {
        continue;
      } else if (!iw && !jw && in_next(u[j])) {
        if (can_run_before(p, W.last(), u[i], u[j])) continue;
      } else if (!jw && !in_next(u[j])) {
        continue;
      }
      return {false, "order of " + label(p, u[i]) + " before " + label(p, u[j])};
    }
  return {};
}

namespace {

std::string path_text(const Program &p, const Path &w) {
  std::string s;
  for (const auto &r : w) {
    if (!s.empty()) s += " . ";
    s += label(p, r);
  }
  return s;
}

// Shortest prefix of u holding every transition of w, if any.
std::optional<Path> covering_prefix(const Path &u, const Path &w) {
  size_t need = 0;
  for (const auto &r : w) {
    auto it = std::find(u.begin(), u.end(), r);
    if (it == u.end()) return std::nullopt;
    need = std::max(need, static_cast<size_t>(it - u.begin()) + 1);
  }
  return Path(u.begin(), u.begin() + need);
}

bool covered(const Program &p, const State &s, const std::vector<Path> &cands, const Path &w,
             const DependenceOptions &o) {
  for (const auto &u : cands) {
    auto pre = covering_prefix(u, w);
    if (pre && is_dependence_covering(p, s, *pre, w, o)) return true;
  }
  return false;
}

struct Trie {
  struct Node {
    std::map<Uid, int> kids;
    std::vector<int> paths;
  };
  std::vector<Node> nodes{1};
};

} // namespace

DcsReport verify_dcs(const Program &p, const std::vector<Path> &explored, const DependenceOptions &o,
                     uint64_t cap, bool every_interleaving) {
  DcsReport rep;
  Trie trie;
  struct Visit {
    int node, depth, path;
  };
  std::vector<Visit> visits;
  for (int k = 0; k < static_cast<int>(explored.size()); ++k) {
    int node = 0;
    for (size_t d = 0; d <= explored[k].size(); ++d) {
      if (trie.nodes[node].paths.empty()) visits.push_back({node, static_cast<int>(d), k});
      trie.nodes[node].paths.push_back(k);
      if (d == explored[k].size()) break;
      Uid u = explored[k][d].uid(p);
      auto it = trie.nodes[node].kids.find(u);
      if (it == trie.nodes[node].kids.end()) {
        trie.nodes.emplace_back();
        int id = static_cast<int>(trie.nodes.size()) - 1;
        trie.nodes[node].kids[u] = id;
        node = id;
      } else {
        node = it->second;
      }
    }
  }
  std::unordered_map<State, std::vector<Path>, StateHash> full;
  const State s0 = initial_state(p);
  for (const auto &v : visits) {
    const Path &rep_path = explored[v.path];
    Sequence pre = replay(p, s0, Path(rep_path.begin(), rep_path.begin() + v.depth));
    const State &s = pre.last();
    auto it = full.find(s);
    if (it == full.end())
      it = full.emplace(s, every_interleaving ? enumerate_all(p, s, cap) : enumerate_representatives(p, s, cap)).first;
    std::vector<Path> cands;
    for (int k : trie.nodes[v.node].paths)
      cands.emplace_back(explored[k].begin() + v.depth, explored[k].end());
    rep.states_checked++;
    for (const auto &w : it->second) {
      rep.sequences_checked++;
      if (!covered(p, s, cands, w, o)) {
        rep.ok = false;
        rep.witness = "after [" + path_text(p, pre.steps) + "] no explored sequence covers [" +
                      path_text(p, w) + "]";
        return rep;
      }
    }
  }
  return rep;
}

DcsReport check_covering_set(const Program &p, const State &s, const std::vector<Transition> &firsts,
                             const DependenceOptions &o, uint64_t cap) {
  DcsReport rep;
  auto all = enumerate_all(p, s, cap);
  std::vector<Path> cands;
  for (const auto &u : all)
    if (!u.empty() && std::find(firsts.begin(), firsts.end(), u.front()) != firsts.end()) cands.push_back(u);
  rep.states_checked = 1;
  for (const auto &w : all) {
    rep.sequences_checked++;
    // Every nonempty prefix of w must be covered as well.
    for (size_t len = 1; len <= w.size(); ++len) {
      Path pre(w.begin(), w.begin() + len);
      if (!covered(p, s, cands, pre, o)) {
        rep.ok = false;
        rep.witness = "no sequence from the given set covers [" + path_text(p, pre) + "]";
        return rep;
      }
    }
  }
  return rep;
}

namespace {

// Bounded draws through plain modular reduction so that the same seed gives
// the same program on every standard library.
struct Rng {
  std::mt19937_64 g;
  explicit Rng(uint64_t seed) : g(seed) {}
  int below(int n) { return static_cast<int>(g() % static_cast<uint64_t>(n)); }
  int range(int lo, int hi) { return lo + below(hi - lo + 1); }
  bool chance(int pct) { return below(100) < pct; }
};

} // namespace

Program gen_random(uint64_t seed, const GenCaps &caps) {
  Rng rng(seed);
  const int n_threads = rng.range(2, std::max(2, caps.max_threads));
  const int n_queues = n_threads >= 3 && rng.chance(35) ? 2 : 1;
  const int n_script = n_threads - n_queues;
  const bool with_fork = n_script >= 2 && rng.chance(30);
  const int n_events = rng.range(1, std::max(1, caps.max_events));
  const int n_vars = rng.range(1, std::max(1, caps.max_vars));
  const int n_locks = std::min(caps.max_locks, rng.chance(70) ? 2 : rng.range(0, 1));

  nlohmann::json doc;
  doc["threads"] = nlohmann::json::array();
  std::vector<std::string> queues, scripts;
  for (int q = 0; q < n_queues; ++q) queues.push_back("q" + std::to_string(q));
  for (int t = 0; t < n_script; ++t) scripts.push_back("t" + std::to_string(t));
  const std::string forked = with_fork ? scripts.back() : "";

  // Tasks are scripts then handlers; ops are appended into these lists.
  std::vector<std::vector<nlohmann::json>> task_ops(n_script + n_events);
  auto handler_task = [&](int e) { return n_script + e; };
  std::vector<std::string> vars, locks;
  for (int v = 0; v < n_vars; ++v) vars.push_back(std::string(1, static_cast<char>('x' + v % 3)) +
                                                  (v >= 3 ? std::to_string(v) : ""));
  for (int l = 0; l < n_locks; ++l) locks.push_back("l" + std::to_string(l));

  auto insert_at = [&](int task, nlohmann::json op) {
    auto &ops = task_ops[task];
    int pos = rng.range(0, static_cast<int>(ops.size()));
    ops.insert(ops.begin() + pos, std::move(op));
  };

  const int non_forked = with_fork ? n_script - 1 : n_script;
  std::vector<int> event_dest; // queue index, which is also the thread index
  for (int e = 0; e < n_events; ++e) {
    std::string ev = "e" + std::to_string(e);
    event_dest.push_back(rng.below(n_queues));
    nlohmann::json op{{"post", {{"event", ev}, {"dest", queues[event_dest.back()]}}}};
    int poster;
    if (e > 0 && rng.chance(30)) poster = handler_task(rng.below(e));
    else poster = rng.below(n_script);
    task_ops[poster].push_back(std::move(op));
  }
  if (with_fork) {
    int t = rng.below(non_forked + n_events);
    int task = t < non_forked ? t : handler_task(t - non_forked);
    insert_at(task, {{"fork", {{"thread", forked}}}});
  }

  auto mem = [&] {
    const std::string &v = vars[rng.below(n_vars)];
    if (rng.chance(50)) return nlohmann::json{{"read", {{"var", v}}}};
    return nlohmann::json{{"write", {{"var", v}, {"val", rng.range(1, 3)}}}};
  };
  // Critical section on lock a, with b nested inside when b >= 0. Placed
  // outside any section already in the task.
  auto place_section = [&](int task, int a, int b, bool body = true) {
    auto &ops = task_ops[task];
    std::vector<nlohmann::json> sec{{{"lock", {{"obj", locks[a]}}}}};
    if (b >= 0) sec.push_back({{"lock", {{"obj", locks[b]}}}});
    if (body) sec.push_back(mem());
    if (b >= 0) sec.push_back({{"unlock", {{"obj", locks[b]}}}});
    sec.push_back({{"unlock", {{"obj", locks[a]}}}});
    std::vector<int> outside{0};
    int depth = 0;
    for (size_t k = 0; k < ops.size(); ++k) {
      if (ops[k].contains("lock")) depth++;
      if (ops[k].contains("unlock")) depth--;
      if (depth == 0) outside.push_back(static_cast<int>(k) + 1);
    }
    int pos = outside[rng.below(static_cast<int>(outside.size()))];
    ops.insert(ops.begin() + pos, sec.begin(), sec.end());
    return static_cast<int>(sec.size());
  };

  const int n_tasks = n_script + n_events;
  auto task_thread = [&](int task) { return task < n_script ? n_queues + task : event_dest[task - n_script]; };
  int budget = rng.range(2, std::max(2, caps.max_ops));
  if (n_locks == 2 && budget >= 8 && rng.chance(50)) {
    // Opposite nesting orders on two different threads.
    int t1 = rng.below(n_tasks), t2 = rng.below(n_tasks);
    for (int tries = 0; tries < 8 && task_thread(t1) == task_thread(t2); ++tries) t2 = rng.below(n_tasks);
    if (task_thread(t1) != task_thread(t2)) {
      budget -= place_section(t1, 0, 1, false);
      budget -= place_section(t2, 1, 0, false);
    }
  }
  while (budget > 0) {
    int task = rng.below(n_tasks);
    int kind = rng.below(100);
    if (kind < 35 && n_locks > 0 && budget >= 3) {
      int a = rng.below(n_locks);
      bool nest = n_locks > 1 && budget >= 5 && rng.chance(65);
      budget -= place_section(task, a, nest ? 1 - a : -1);
    } else if (kind < 40) {
      insert_at(task, {{"assert", {{"id", "a" + std::to_string(rng.below(3))}}}});
      budget -= 1;
    } else {
      insert_at(task, mem());
      budget -= 1;
    }
  }

  for (const auto &q : queues)
    doc["threads"].push_back({{"id", q}, {"queue", true}, {"start", "enabled"}, {"script", nlohmann::json::array()}});
  for (int t = 0; t < n_script; ++t) {
    nlohmann::json script = nlohmann::json::array();
    bool is_forked = scripts[t] == forked;
    if (is_forked) script.push_back({{"init", nlohmann::json::object()}});
    for (auto &op : task_ops[t]) script.push_back(op);
    doc["threads"].push_back({{"id", scripts[t]}, {"queue", false}, {"start", is_forked ? "forked" : "enabled"},
                              {"script", script}});
  }
  doc["handlers"] = nlohmann::json::object();
  for (int e = 0; e < n_events; ++e) {
    nlohmann::json h = nlohmann::json::array();
    for (auto &op : task_ops[handler_task(e)]) h.push_back(op);
    doc["handlers"]["e" + std::to_string(e)] = h;
  }
  doc["vars"] = nlohmann::json::object();
  for (const auto &v : vars) doc["vars"][v] = 0;
  doc["locks"] = locks;
  return load_program(doc);
}

bool has_post_race(const Program &p) {
  std::vector<std::pair<TaskId, int>> posts; // (posting task, dest)
  for (int t = 0; t < p.num_threads(); ++t)
    for (const auto &op : p.threads[t].script)
      if (op.kind == OpKind::post) posts.push_back({{t, -1}, op.dest});
  for (int e = 0; e < p.num_events(); ++e)
    for (const auto &op : p.handlers[e])
      if (op.kind == OpKind::post) posts.push_back({{p.event_dest[e], e}, op.dest});
  for (size_t a = 0; a < posts.size(); ++a)
    for (size_t b = a + 1; b < posts.size(); ++b)
      if (posts[a].second == posts[b].second && posts[a].first != posts[b].first) return true;
  return false;
}

} // namespace evex
