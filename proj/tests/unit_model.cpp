#include "unit_common.hpp"

using namespace evex;
using namespace evex::test;
using nlohmann::json;

TEST_SUITE("model") {

TEST_CASE("fig1 loads with one queue thread and three handlers") {
  Program p = fixture("fig1");
  REQUIRE(p.num_threads() == 3);
  CHECK(p.threads[0].id == "t1");
  CHECK(p.threads[0].queue);
  CHECK_FALSE(p.threads[1].queue);
  REQUIRE(p.num_events() == 3);
  int e1 = *p.event_index("e1"), e3 = *p.event_index("e3");
  REQUIRE(p.handlers[e1].size() == 1);
  CHECK(p.handlers[e1][0].kind == OpKind::post);
  CHECK(p.handlers[e1][0].event == e3);
  CHECK(p.handlers[e1][0].dest == 0);
  CHECK(p.handlers[*p.event_index("e2")][0].kind == OpKind::write);
}

TEST_CASE("empty program is valid and has a single empty trace") {
  Program p = load_program(json{{"threads", json::array()}});
  CHECK(p.num_threads() == 0);
  auto st = explore(p, Algo::brute);
  CHECK(st.traces == 1);
  CHECK(st.transitions == 0);
}

TEST_CASE("validation errors") {
  auto queue = json{{"id", "q"}, {"queue", true}, {"start", "enabled"}, {"script", json::array()}};
  auto poster = [](const std::string &ev) {
    return json{{"id", "a"}, {"queue", false}, {"start", "enabled"},
                {"script", json::array({{{"post", {{"event", ev}, {"dest", "q"}}}}})}};
  };

  SUBCASE("posting an event with no handler") {
    json doc{{"threads", json::array({queue, poster("e1")})}, {"handlers", json::object()}};
    CHECK(has_kind(issues_of(doc), ErrorKind::missing_handler));
  }
  SUBCASE("handler posting an undeclared event") {
    json doc{{"threads", json::array({queue, poster("e1")})},
             {"handlers", {{"e1", json::array({{{"post", {{"event", "e9"}, {"dest", "q"}}}}})}}}};
    CHECK(has_kind(issues_of(doc), ErrorKind::missing_handler));
  }
  SUBCASE("duplicate thread id") {
    json doc{{"threads", json::array({queue, queue})}};
    CHECK(has_kind(issues_of(doc), ErrorKind::duplicate_id));
  }
  SUBCASE("lock left held") {
    json t{{"id", "a"}, {"queue", false}, {"start", "enabled"},
           {"script", json::array({{{"lock", {{"obj", "l"}}}}})}};
    json doc{{"threads", json::array({t})}, {"locks", json::array({"l"})}};
    CHECK(has_kind(issues_of(doc), ErrorKind::unbalanced_lock));
  }
  SUBCASE("fork of an unknown thread") {
    json t{{"id", "a"}, {"queue", false}, {"start", "enabled"},
           {"script", json::array({{{"fork", {{"thread", "zz"}}}}})}};
    CHECK(has_kind(issues_of(json{{"threads", json::array({t})}}), ErrorKind::fork_target_invalid));
  }
  SUBCASE("all issues are reported together") {
    json t{{"id", "a"}, {"queue", false}, {"start", "enabled"},
           {"script", json::array({{{"fork", {{"thread", "zz"}}}}, {{"lock", {{"obj", "l"}}}}})}};
    json doc{{"threads", json::array({t, t})}, {"locks", json::array({"l"})}};
    auto is = issues_of(doc);
    CHECK(has_kind(is, ErrorKind::duplicate_id));
    CHECK(has_kind(is, ErrorKind::fork_target_invalid));
  }
}

TEST_CASE("program round-trips through json") {
  Program p = fixture("fig8");
  Program q = load_program(program_to_json(p));
  CHECK(program_to_json(q) == program_to_json(p));
}

TEST_CASE("initial state") {
  Program p = fixture("fig3");
  State s = initial_state(p);
  CHECK(s.threads[th(p, "t4")].status == Status::not_forked);
  CHECK(s.store == std::vector<int64_t>{0});
  for (const auto &q : s.queues) CHECK(q.empty());
  CHECK(enabled_threads(p, s) == std::vector<int>{th(p, "t2"), th(p, "t3")});
}

TEST_CASE("next transition and enabledness") {
  Program p = fixture("fig1");
  const int t1 = th(p, "t1"), t2 = th(p, "t2"), t3 = th(p, "t3");
  State s0 = initial_state(p);
  CHECK_FALSE(next_transition(p, s0, t1).has_value());

  Sequence w = run_threads(p, {t2});
  auto b = next_transition(p, w.last(), t1);
  REQUIRE(b);
  CHECK(b->op.kind == OpKind::begin);
  CHECK(b->op.event == *p.event_index("e1"));
  CHECK(w.last().queues[t1] == std::vector<int>{*p.event_index("e1")});

  append(p, w, *next_transition(p, w.last(), t3));
  CHECK(w.last().queues[t1].size() == 2);
  Transition begin_e2{{t1, *p.event_index("e2")}, 0, {}};
  begin_e2.op.kind = OpKind::begin;
  begin_e2.op.event = *p.event_index("e2");
  CHECK_FALSE(is_enabled(p, w.last(), begin_e2));
  CHECK_FALSE(next_transition(p, w.last(), t2).has_value());

  append(p, w, *b);
  auto r3 = next_transition(p, w.last(), t1);
  REQUIRE(r3);
  CHECK(r3->op.kind == OpKind::post);
  CHECK(r3->event() == *p.event_index("e1"));
}

TEST_CASE("init is blocked until the fork runs") {
  Program p = fixture("fig3");
  State s0 = initial_state(p);
  auto init = next_transition(p, s0, th(p, "t4"));
  REQUIRE(init);
  CHECK(init->op.kind == OpKind::init);
  CHECK_FALSE(is_enabled(p, s0, *init));
}

TEST_CASE("lock enabledness and store semantics") {
  Program p = fixture("locks_abba");
  State s0 = initial_state(p);
  auto la = next_transition(p, s0, 0);
  REQUIRE(la);
  CHECK(is_enabled(p, s0, *la));

  Program q = fixture("fig11");
  Sequence w = start_sequence(initial_state(q));
  int64_t seen = -1;
  bool wrote = false;
  for (int guard = 0; guard < 100; ++guard) {
    auto en = next_transitions(q, w.last());
    const Transition *pick = nullptr;
    for (const auto &r : en)
      if (is_enabled(q, w.last(), r)) {
        pick = &r;
        if (!wrote && r.op.kind == OpKind::write) break;
      }
    if (!pick) break;
    Transition r = *pick;
    append(q, w, r);
    if (r.op.kind == OpKind::write) wrote = true;
    if (wrote && r.op.kind == OpKind::read) {
      seen = w.observed.back();
      break;
    }
  }
  CHECK(seen == 100);
}

TEST_CASE("execute leaves its input untouched and is deterministic") {
  Program p = fixture("fig8");
  State s = initial_state(p);
  State copy = s;
  auto r = next_transition(p, s, enabled_threads(p, s).front());
  auto a = execute(p, s, *r), b = execute(p, s, *r);
  CHECK(s == copy);
  CHECK(a.state == b.state);
  CHECK(fingerprint(a.state) == fingerprint(b.state));
  CHECK(a.state.executed == s.executed + 1);
}

TEST_CASE("ABBA deadlock cycle") {
  Program p = fixture("locks_abba");
  CHECK(deadlock_cycles(p, initial_state(p)).empty());
  Sequence w = run_threads(p, {0, 1});
  CHECK(enabled_threads(p, w.last()).empty());
  auto cs = deadlock_cycles(p, w.last());
  REQUIRE(cs.size() == 1);
  REQUIRE(cs[0].members.size() == 2);
  CHECK(cs[0].members[0].thread() == 0);
  CHECK(cs[0].members[0].op.lock == 1);
  CHECK(cs[0].members[1].op.lock == 0);

  auto st = explore(p, Algo::brute);
  CHECK(st.deadlock_cycles.size() == 1);
}

TEST_CASE("queue order follows post order") {
  Program p = fixture("fig5");
  auto st = explore(p, Algo::brute, {.record_sequences = true});
  for (const auto &seq : st.sequences) {
    std::vector<int> posted, begun;
    for (const auto &r : seq.steps) {
      if (r.op.kind == OpKind::post) posted.push_back(r.op.event);
      if (r.op.kind == OpKind::begin) begun.push_back(r.op.event);
    }
    CHECK(posted == begun);
  }
}

TEST_CASE("every fig1 interleaving reaches the same final state") {
  Program p = fixture("fig1");
  auto st = explore(p, Algo::brute, {.record_sequences = true});
  CHECK(st.traces == st.sequences.size());
  for (const auto &seq : st.sequences) {
    CHECK(enabled_threads(p, seq.final_state).empty());
    CHECK(seq.final_state == st.sequences[0].final_state);
  }
}

}
