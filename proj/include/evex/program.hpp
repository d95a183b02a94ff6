#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace evex {

enum class OpKind {
  post,
  read,
  write,
  lock,
  unlock,
  fork,
  init,
  assert_op,
  begin,
  end,
};

const char *op_kind_name(OpKind k);

/// One scripted or handler operation. Unused fields stay at -1.
/// Names are resolved to dense indices by load_program.
struct Operation {
  OpKind kind = OpKind::init;
  int event = -1;
  int dest = -1;
  int var = -1;
  int64_t val = 0;
  int lock = -1;
  int thread = -1;
  int assert_id = -1;

  bool operator==(const Operation &) const = default;
};

struct ThreadSpec {
  std::string id;
  bool queue = false;
  bool forked = false;
  std::vector<Operation> script;
};

enum class ErrorKind {
  duplicate_id,
  missing_handler,
  unbalanced_lock,
  fork_target_invalid,
  malformed,
};

const char *error_kind_name(ErrorKind k);

struct ProgramIssue {
  ErrorKind kind;
  std::string detail;
};

class ProgramError : public std::runtime_error {
public:
  explicit ProgramError(std::vector<ProgramIssue> issues);
  const std::vector<ProgramIssue> &issues() const { return issues_; }

private:
  std::vector<ProgramIssue> issues_;
};

/// A validated program. Threads, events, vars, locks and assert ids are
/// referred to by position in the name tables below.
struct Program {
  std::vector<ThreadSpec> threads;
  std::vector<std::string> event_names;
  std::vector<std::vector<Operation>> handlers; // indexed by event
  std::vector<int> event_dest;                  // -1 when never posted
  std::vector<std::string> var_names;
  std::vector<int64_t> var_init;
  std::vector<std::string> lock_names;
  std::vector<std::string> assert_names;

  int num_threads() const { return static_cast<int>(threads.size()); }
  int num_events() const { return static_cast<int>(event_names.size()); }
  int num_tasks() const { return num_threads() + num_events(); }

  std::optional<int> thread_index(const std::string &name) const;
  std::optional<int> event_index(const std::string &name) const;

  std::string describe(const Operation &op) const;
};

Program load_program(const nlohmann::json &doc);
Program load_program_file(const std::string &path);
nlohmann::json program_to_json(const Program &p);

} // namespace evex
