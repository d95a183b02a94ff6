#include "evex/program.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace evex {

using nlohmann::json;

const char *op_kind_name(OpKind k) {
  switch (k) {
  case OpKind::post: return "post";
  case OpKind::read: return "read";
  case OpKind::write: return "write";
  case OpKind::lock: return "lock";
  case OpKind::unlock: return "unlock";
  case OpKind::fork: return "fork";
  case OpKind::init: return "init";
  case OpKind::assert_op: return "assert";
  case OpKind::begin: return "begin";
  case OpKind::end: return "end";
  }
  return "?";
}

const char *error_kind_name(ErrorKind k) {
  switch (k) {
  case ErrorKind::duplicate_id: return "DuplicateId";
  case ErrorKind::missing_handler: return "MissingHandler";
  case ErrorKind::unbalanced_lock: return "UnbalancedLock";
  case ErrorKind::fork_target_invalid: return "ForkTargetInvalid";
  case ErrorKind::malformed: return "Malformed";
  }
  return "?";
}

static std::string join_issues(const std::vector<ProgramIssue> &issues) {
  std::ostringstream os;
  for (size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << error_kind_name(issues[i].kind) << ": " << issues[i].detail;
  }
  return os.str();
}

ProgramError::ProgramError(std::vector<ProgramIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::optional<int> Program::thread_index(const std::string &name) const {
  for (int i = 0; i < num_threads(); ++i)
    if (threads[i].id == name) return i;
  return std::nullopt;
}

std::optional<int> Program::event_index(const std::string &name) const {
  for (int i = 0; i < num_events(); ++i)
    if (event_names[i] == name) return i;
  return std::nullopt;
}

std::string Program::describe(const Operation &op) const {
  std::ostringstream os;
  os << op_kind_name(op.kind);
  switch (op.kind) {
  case OpKind::post:
    os << "(" << event_names[op.event] << "@" << threads[op.dest].id << ")";
    break;
  case OpKind::read: os << "(" << var_names[op.var] << ")"; break;
  case OpKind::write: os << "(" << var_names[op.var] << "," << op.val << ")"; break;
  case OpKind::lock:
  case OpKind::unlock: os << "(" << lock_names[op.lock] << ")"; break;
  case OpKind::fork: os << "(" << threads[op.thread].id << ")"; break;
  case OpKind::assert_op: os << "(" << assert_names[op.assert_id] << ")"; break;
  case OpKind::begin:
  case OpKind::end: os << "(" << event_names[op.event] << ")"; break;
  case OpKind::init: break;
  }
  return os.str();
}

namespace {

// Raw operation as read from JSON, before name resolution.
struct RawOp {
  OpKind kind;
  std::string a, b;
  int64_t val = 0;
};

struct Loader {
  std::vector<ProgramIssue> issues;

  void fail(ErrorKind k, std::string d) { issues.push_back({k, std::move(d)}); }

  std::string str_field(const json &o, const char *key, const std::string &ctx) {
    if (!o.is_object() || !o.contains(key) || !o[key].is_string()) {
      fail(ErrorKind::malformed, ctx + ": missing string field '" + key + "'");
      return {};
    }
    return o[key].get<std::string>();
  }

  std::optional<RawOp> parse_op(const json &j, const std::string &ctx) {
    if (!j.is_object() || j.size() != 1) {
      fail(ErrorKind::malformed, ctx + ": operation must be a single-key object");
      return std::nullopt;
    }
    auto it = j.begin();
    const std::string &k = it.key();
    const json &body = it.value();
    RawOp op{};
    if (k == "post") {
      op.kind = OpKind::post;
      op.a = str_field(body, "event", ctx);
      op.b = str_field(body, "dest", ctx);
    } else if (k == "read") {
      op.kind = OpKind::read;
      op.a = str_field(body, "var", ctx);
    } else if (k == "write") {
      op.kind = OpKind::write;
      op.a = str_field(body, "var", ctx);
      if (!body.contains("val") || !body["val"].is_number_integer())
        fail(ErrorKind::malformed, ctx + ": write needs integer 'val'");
      else
        op.val = body["val"].get<int64_t>();
    } else if (k == "lock" || k == "unlock") {
      op.kind = k == "lock" ? OpKind::lock : OpKind::unlock;
      op.a = str_field(body, "obj", ctx);
    } else if (k == "fork") {
      op.kind = OpKind::fork;
      op.a = str_field(body, "thread", ctx);
    } else if (k == "init") {
      op.kind = OpKind::init;
    } else if (k == "assert") {
      op.kind = OpKind::assert_op;
      op.a = str_field(body, "id", ctx);
    } else {
      fail(ErrorKind::malformed, ctx + ": unknown operation '" + k + "'");
      return std::nullopt;
    }
    return op;
  }

  std::vector<RawOp> parse_ops(const json &arr, const std::string &ctx) {
    std::vector<RawOp> out;
    if (!arr.is_array()) {
      fail(ErrorKind::malformed, ctx + ": expected an array of operations");
      return out;
    }
    for (size_t i = 0; i < arr.size(); ++i)
      if (auto op = parse_op(arr[i], ctx + "[" + std::to_string(i) + "]")) out.push_back(*op);
    return out;
  }
};

} // namespace

Program load_program(const json &doc) {
  Loader L;
  Program p;
  if (!doc.is_object()) throw ProgramError({{ErrorKind::malformed, "program must be an object"}});

  std::vector<std::vector<RawOp>> raw_scripts;
  std::vector<std::vector<RawOp>> raw_handlers;

  if (doc.contains("threads")) {
    const json &ts = doc["threads"];
    if (!ts.is_array()) L.fail(ErrorKind::malformed, "'threads' must be an array");
    else
      for (size_t i = 0; i < ts.size(); ++i) {
        std::string ctx = "threads[" + std::to_string(i) + "]";
        ThreadSpec t;
        t.id = L.str_field(ts[i], "id", ctx);
        t.queue = ts[i].value("queue", false);
        std::string start = ts[i].value("start", std::string("enabled"));
        if (start == "forked") t.forked = true;
        else if (start != "enabled") L.fail(ErrorKind::malformed, ctx + ": bad start '" + start + "'");
        if (p.thread_index(t.id)) L.fail(ErrorKind::duplicate_id, "thread '" + t.id + "'");
        raw_scripts.push_back(ts[i].contains("script") ? L.parse_ops(ts[i]["script"], ctx + ".script")
                                                       : std::vector<RawOp>{});
        p.threads.push_back(std::move(t));
      }
  }

  if (doc.contains("vars")) {
    const json &vs = doc["vars"];
    if (!vs.is_object()) L.fail(ErrorKind::malformed, "'vars' must be an object");
    else
      for (auto it = vs.begin(); it != vs.end(); ++it) {
        if (!it.value().is_number_integer()) {
          L.fail(ErrorKind::malformed, "var '" + it.key() + "' needs an integer initial value");
          continue;
        }
        p.var_names.push_back(it.key());
        p.var_init.push_back(it.value().get<int64_t>());
      }
  }

  if (doc.contains("locks")) {
    const json &ls = doc["locks"];
    if (!ls.is_array()) L.fail(ErrorKind::malformed, "'locks' must be an array");
    else
      for (const auto &l : ls) {
        if (!l.is_string()) {
          L.fail(ErrorKind::malformed, "lock names must be strings");
          continue;
        }
        std::string n = l.get<std::string>();
        for (auto &o : p.lock_names)
          if (o == n) L.fail(ErrorKind::duplicate_id, "lock '" + n + "'");
        p.lock_names.push_back(n);
      }
  }

  if (doc.contains("handlers")) {
    const json &hs = doc["handlers"];
    if (!hs.is_object()) L.fail(ErrorKind::malformed, "'handlers' must be an object");
    else
      for (auto it = hs.begin(); it != hs.end(); ++it) {
        p.event_names.push_back(it.key());
        raw_handlers.push_back(L.parse_ops(it.value(), "handlers." + it.key()));
      }
  }

  // Events posted but lacking a handler are reported, then given an empty
  // slot so resolution below can continue collecting issues.
  auto scan_posts = [&](const std::vector<RawOp> &ops) {
    for (const auto &op : ops)
      if (op.kind == OpKind::post && !op.a.empty() && !p.event_index(op.a)) {
        L.fail(ErrorKind::missing_handler, "event '" + op.a + "'");
        p.event_names.push_back(op.a);
        raw_handlers.emplace_back();
      }
  };
  for (auto &s : raw_scripts) scan_posts(s);
  for (size_t i = 0; i < raw_handlers.size(); ++i) scan_posts(raw_handlers[i]);

  auto find_name = [](const std::vector<std::string> &names, const std::string &n) -> int {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return static_cast<int>(i);
    return -1;
  };

  p.event_dest.assign(p.event_names.size(), -1);
  std::vector<int> post_sites(p.event_names.size(), 0);
  std::vector<int> fork_sites(p.threads.size(), 0);

  auto resolve = [&](const std::vector<RawOp> &raw, const std::string &ctx) {
    std::vector<Operation> out;
    for (const auto &r : raw) {
      Operation op;
      op.kind = r.kind;
      switch (r.kind) {
      case OpKind::post: {
        op.event = find_name(p.event_names, r.a);
        auto d = p.thread_index(r.b);
        if (!d) {
          L.fail(ErrorKind::malformed, ctx + ": post to unknown thread '" + r.b + "'");
          break;
        }
        op.dest = *d;
        if (!p.threads[*d].queue)
          L.fail(ErrorKind::malformed, ctx + ": post to thread '" + r.b + "' which has no queue");
        if (op.event >= 0) {
          if (++post_sites[op.event] > 1)
            L.fail(ErrorKind::duplicate_id, "event '" + r.a + "' is posted more than once");
          p.event_dest[op.event] = op.dest;
        }
        break;
      }
      case OpKind::read:
      case OpKind::write:
        op.var = find_name(p.var_names, r.a);
        op.val = r.val;
        if (op.var < 0) L.fail(ErrorKind::malformed, ctx + ": unknown var '" + r.a + "'");
        break;
      case OpKind::lock:
      case OpKind::unlock:
        op.lock = find_name(p.lock_names, r.a);
        if (op.lock < 0) L.fail(ErrorKind::malformed, ctx + ": unknown lock '" + r.a + "'");
        break;
      case OpKind::fork: {
        auto t = p.thread_index(r.a);
        if (!t || !p.threads[*t].forked) {
          L.fail(ErrorKind::fork_target_invalid, ctx + ": fork of '" + r.a + "'");
          break;
        }
        op.thread = *t;
        if (++fork_sites[*t] > 1)
          L.fail(ErrorKind::fork_target_invalid, "thread '" + r.a + "' is forked more than once");
        break;
      }
      case OpKind::assert_op: {
        int a = find_name(p.assert_names, r.a);
        if (a < 0) {
          a = static_cast<int>(p.assert_names.size());
          p.assert_names.push_back(r.a);
        }
        op.assert_id = a;
        break;
      }
      default: break;
      }
      out.push_back(op);
    }
    // Locks must be acquired and released in nested order within a task.
    std::vector<int> held;
    bool ok = true;
    for (const auto &op : out) {
      if (op.kind == OpKind::lock && op.lock >= 0) {
        for (int h : held)
          if (h == op.lock) ok = false;
        held.push_back(op.lock);
      } else if (op.kind == OpKind::unlock && op.lock >= 0) {
        if (held.empty() || held.back() != op.lock) ok = false;
        else held.pop_back();
      }
    }
    if (!ok || !held.empty()) L.fail(ErrorKind::unbalanced_lock, ctx);
    return out;
  };

  for (size_t i = 0; i < p.threads.size(); ++i) {
    const std::string ctx = "thread '" + p.threads[i].id + "'";
    p.threads[i].script = resolve(raw_scripts[i], ctx);
    auto &t = p.threads[i];
    if (t.queue && !t.script.empty())
      L.fail(ErrorKind::malformed, ctx + ": a queue thread cannot have a script");
    if (t.queue && t.forked) L.fail(ErrorKind::malformed, ctx + ": a queue thread cannot be forked");
    for (size_t k = 0; k < t.script.size(); ++k) {
      bool is_init = t.script[k].kind == OpKind::init;
      if (is_init && !(t.forked && k == 0))
        L.fail(ErrorKind::malformed, ctx + ": init is only allowed as the first op of a forked thread");
    }
    if (t.forked && (t.script.empty() || t.script[0].kind != OpKind::init))
      L.fail(ErrorKind::malformed, ctx + ": a forked thread must start with init");
  }
  for (size_t e = 0; e < raw_handlers.size(); ++e) {
    const std::string ctx = "handler '" + p.event_names[e] + "'";
    p.handlers.push_back(resolve(raw_handlers[e], ctx));
    for (const auto &op : p.handlers.back())
      if (op.kind == OpKind::init) L.fail(ErrorKind::malformed, ctx + ": init inside a handler");
  }

  if (!L.issues.empty()) throw ProgramError(std::move(L.issues));
  return p;
}

Program load_program_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ProgramError({{ErrorKind::malformed, "cannot open " + path}});
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error &e) {
    throw ProgramError({{ErrorKind::malformed, path + ": " + e.what()}});
  }
  return load_program(doc);
}

static json op_to_json(const Program &p, const Operation &op) {
  switch (op.kind) {
  case OpKind::post:
    return {{"post", {{"event", p.event_names[op.event]}, {"dest", p.threads[op.dest].id}}}};
  case OpKind::read: return {{"read", {{"var", p.var_names[op.var]}}}};
  case OpKind::write: return {{"write", {{"var", p.var_names[op.var]}, {"val", op.val}}}};
  case OpKind::lock: return {{"lock", {{"obj", p.lock_names[op.lock]}}}};
  case OpKind::unlock: return {{"unlock", {{"obj", p.lock_names[op.lock]}}}};
  case OpKind::fork: return {{"fork", {{"thread", p.threads[op.thread].id}}}};
  case OpKind::init: return {{"init", json::object()}};
  case OpKind::assert_op: return {{"assert", {{"id", p.assert_names[op.assert_id]}}}};
  default: return nullptr;
  }
}

json program_to_json(const Program &p) {
  json doc;
  doc["threads"] = json::array();
  for (const auto &t : p.threads) {
    json jt{{"id", t.id}, {"queue", t.queue}, {"start", t.forked ? "forked" : "enabled"}};
    jt["script"] = json::array();
    for (const auto &op : t.script) jt["script"].push_back(op_to_json(p, op));
    doc["threads"].push_back(jt);
  }
  doc["handlers"] = json::object();
  for (int e = 0; e < p.num_events(); ++e) {
    json h = json::array();
    for (const auto &op : p.handlers[e]) h.push_back(op_to_json(p, op));
    doc["handlers"][p.event_names[e]] = h;
  }
  doc["vars"] = json::object();
  for (size_t v = 0; v < p.var_names.size(); ++v) doc["vars"][p.var_names[v]] = p.var_init[v];
  doc["locks"] = p.lock_names;
  return doc;
}

} // namespace evex
