#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evex/program.hpp"

namespace evex {

/// A task is either a thread's script (event == -1) or the handler of one
/// event on its destination thread.
struct TaskId {
  int thread = -1;
  int event = -1;
  auto operator<=>(const TaskId &) const = default;
};

/// Dense numbering of tasks: scripts first, then one slot per event.
inline int task_index(const Program &p, const TaskId &t) {
  return t.event < 0 ? t.thread : p.num_threads() + t.event;
}
TaskId task_at(const Program &p, int index);

/// Stable identity of a transition across different interleavings.
struct Uid {
  int task = -1;
  int index = -1;
  auto operator<=>(const Uid &) const = default;
};

struct Transition {
  TaskId task;
  int index = 0;
  Operation op;

  int thread() const { return task.thread; }
  int event() const { return task.event; }
  Uid uid(const Program &p) const { return {task_index(p, task), index}; }
  bool operator==(const Transition &o) const { return task == o.task && index == o.index; }
};

std::string label(const Program &p, const Transition &t);

enum class Status : uint8_t { not_forked, running, idle, in_handler, finished };

struct ThreadState {
  Status status = Status::running;
  int pc = 0;
  int event = -1;
  bool operator==(const ThreadState &) const = default;
};

struct State {
  std::vector<ThreadState> threads;
  std::vector<std::vector<int>> queues;
  std::vector<int> lock_owner; // thread index, -1 when free
  std::vector<int64_t> store;
  int executed = 0;

  bool operator==(const State &o) const {
    return threads == o.threads && queues == o.queues && lock_owner == o.lock_owner &&
           store == o.store;
  }
};

uint64_t fingerprint(const State &s);

struct StateHash {
  size_t operator()(const State &s) const { return static_cast<size_t>(fingerprint(s)); }
};

State initial_state(const Program &p);

/// Next transition of thread t, whether enabled or not. A thread that has
/// not been forked yet reports its init transition (never enabled).
std::optional<Transition> next_transition(const Program &p, const State &s, int t);
bool is_enabled(const Program &p, const State &s, const Transition &r);

/// Threads whose next transition is enabled, in ascending index order.
std::vector<int> enabled_threads(const Program &p, const State &s);
std::vector<Transition> next_transitions(const Program &p, const State &s);

struct Executed {
  State state;
  int64_t observed = 0; // value seen by a read
};

Executed execute(const Program &p, const State &s, const Transition &r);

/// Event a queue thread is running or would run next; -1 otherwise.
int executable_event(const State &s, int t);
/// Events queued on t behind the executable one.
std::vector<int> blocked_events(const State &s, int t);

struct DeadlockCycle {
  std::vector<Transition> members; // rotated so the smallest thread is first
};

std::vector<DeadlockCycle> deadlock_cycles(const Program &p, const State &s);
std::vector<Uid> cycle_key(const Program &p, const DeadlockCycle &c);

} // namespace evex
