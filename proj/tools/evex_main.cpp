// Command line front end: run an explorer, compare against brute force,
// check covering sets, or generate random programs.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "evex/oracle.hpp"
#include "evex/report.hpp"

using namespace evex;

namespace {

struct Common {
  std::string program;
  std::string opts;
  bool no_fork_hb = false;
  uint64_t cap = 2'000'000;
  std::string seed_schedule;
  bool truncate = false;
};

void add_common(CLI::App *cmd, Common &c) {
  cmd->add_option("--program", c.program, "program JSON file")->required();
  cmd->add_option("--opt", c.opts, "comma separated: read-read-indep, lock-indep");
  cmd->add_flag("--no-fork-hb", c.no_fork_hb, "drop the fork/init ordering edge");
  cmd->add_option("--cap", c.cap, "transition budget");
  cmd->add_option("--seed-schedule", c.seed_schedule, "comma separated thread ids for the first descent");
  cmd->add_flag("--truncate-backtrack", c.truncate)->group(""); // test hook
}

std::vector<std::string> split(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

ExploreOptions make_options(const Program &p, const Common &c) {
  ExploreOptions o;
  for (const auto &name : split(c.opts)) {
    if (name == "read-read-indep") o.read_read_indep = true;
    else if (name == "lock-indep") o.lock_indep = true;
    else throw std::invalid_argument("unknown --opt value '" + name + "'");
  }
  o.fork_hb = !c.no_fork_hb;
  o.cap = c.cap;
  o.truncate_backtrack = c.truncate;
  for (const auto &t : split(c.seed_schedule)) {
    auto idx = p.thread_index(t);
    if (!idx) throw std::invalid_argument("unknown thread '" + t + "' in --seed-schedule");
    o.seed_schedule.push_back(*idx);
  }
  return o;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"stateless model checker for event-driven multi-threaded programs"};
  app.require_subcommand(1);

  Common run_c, diff_c, cov_c;
  std::string algo = "emdpor", stats_out, cov_algo = "emdpor";
  bool dump_hb = false;
  auto *run = app.add_subcommand("run", "explore a program");
  add_common(run, run_c);
  run->add_option("--algo", algo, "emdpor | dpor | brute")->check(CLI::IsMember({"emdpor", "dpor", "brute"}));
  run->add_option("--stats", stats_out, "write statistics JSON here");
  run->add_flag("--dump-hb", dump_hb, "print happens-before edges of each explored sequence");

  auto *diff = app.add_subcommand("diff", "compare deadlocks and asserts against brute force");
  add_common(diff, diff_c);

  auto *cov = app.add_subcommand("check-covering", "verify the explored sets are covering at every state");
  add_common(cov, cov_c);
  cov->add_option("--algo", cov_algo, "emdpor | dpor")->check(CLI::IsMember({"emdpor", "dpor"}));

  uint64_t seed = 0;
  std::string gen_out;
  auto *gen = app.add_subcommand("gen", "write a random program");
  gen->add_option("--seed", seed)->required();
  gen->add_option("--out", gen_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      std::ofstream(gen_out) << program_to_json(gen_random(seed)).dump(2) << "\n";
      return 0;
    }
    if (*run) {
      Program p = load_program_file(run_c.program);
      ExploreOptions o = make_options(p, run_c);
      o.record_sequences = dump_hb;
      auto st = explore(p, parse_algo(algo), o);
      auto j = stats_to_json(p, st);
      std::cout << j.dump(2) << "\n";
      if (!stats_out.empty()) std::ofstream(stats_out) << j.dump(2) << "\n";
      if (dump_hb) {
        auto dep = o.dependence(parse_algo(algo) != Algo::dpor);
        for (size_t k = 0; k < st.sequences.size(); ++k) {
          std::cout << "sequence " << k << "\n";
          for (size_t i = 0; i < st.sequences[k].steps.size(); ++i)
            std::cout << "  " << i << ": " << label(p, st.sequences[k].steps[i]) << "\n";
          for (const auto &e : hb_edges(p, st.sequences[k], dep)) std::cout << "  " << e << "\n";
        }
      }
      return st.cap_exceeded ? 2 : 0;
    }
    if (*diff) {
      Program p = load_program_file(diff_c.program);
      ExploreOptions o = make_options(p, diff_c);
      auto em = explore(p, Algo::emdpor, o);
      auto bf = explore(p, Algo::brute, o);
      if (em.cap_exceeded || bf.cap_exceeded) {
        std::cerr << "cap exceeded\n";
        return 2;
      }
      bool same_dl = em.deadlock_cycles.size() == bf.deadlock_cycles.size();
      for (const auto &[k, c] : bf.deadlock_cycles) same_dl = same_dl && em.deadlock_cycles.count(k);
      bool same_as = em.asserts == bf.asserts;
      nlohmann::json j{{"emdpor", stats_to_json(p, em)}, {"brute", stats_to_json(p, bf)},
                       {"deadlocks_agree", same_dl}, {"asserts_agree", same_as}};
      std::cout << j.dump(2) << "\n";
      return same_dl && same_as ? 0 : 3;
    }
    if (*cov) {
      Program p = load_program_file(cov_c.program);
      ExploreOptions o = make_options(p, cov_c);
      o.record_sequences = true;
      Algo a = parse_algo(cov_algo);
      auto st = explore(p, a, o);
      if (st.cap_exceeded) {
        std::cerr << "cap exceeded\n";
        return 2;
      }
      std::vector<Path> paths;
      for (const auto &s : st.sequences) paths.push_back(s.steps);
      auto rep = verify_dcs(p, paths, o.dependence(a != Algo::dpor), o.cap);
      nlohmann::json j{{"ok", rep.ok}, {"states_checked", rep.states_checked},
                       {"sequences_checked", rep.sequences_checked}};
      if (!rep.ok) j["witness"] = rep.witness;
      std::cout << j.dump(2) << "\n";
      return rep.ok ? 0 : 3;
    }
  } catch (const ProgramError &e) {
    std::cerr << "invalid program: " << e.what() << "\n";
    return 1;
  } catch (const SpaceCapExceeded &e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
