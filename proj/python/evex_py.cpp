#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "evex/explore.hpp"
#include "evex/oracle.hpp"
#include "evex/report.hpp"

namespace py = pybind11;
using namespace evex;

namespace {

ExploreOptions options(bool read_read_indep, bool lock_indep, bool fork_hb, uint64_t cap) {
  ExploreOptions o;
  o.read_read_indep = read_read_indep;
  o.lock_indep = lock_indep;
  o.fork_hb = fork_hb;
  o.cap = cap;
  return o;
}

std::vector<Path> explored(const Program &p, Algo a, ExploreOptions o) {
  o.record_sequences = true;
  auto st = explore(p, a, o);
  if (st.cap_exceeded) throw SpaceCapExceeded(o.cap);
  std::vector<Path> out;
  for (auto &seq : st.sequences) out.push_back(std::move(seq.steps));
  return out;
}

} // namespace

PYBIND11_MODULE(_evex, m) {
  py::register_exception<ProgramError>(m, "ProgramError", PyExc_ValueError);
  py::register_exception<SpaceCapExceeded>(m, "SpaceCapExceeded", PyExc_RuntimeError);

  py::class_<Program>(m, "Program")
      .def_property_readonly("threads",
                             [](const Program &p) {
                               std::vector<std::string> ids;
                               for (const auto &t : p.threads) ids.push_back(t.id);
                               return ids;
                             })
      .def_readonly("events", &Program::event_names)
      .def("to_json", [](const Program &p) { return program_to_json(p).dump(); });

  m.def("load_program", [](const std::string &text) { return load_program(nlohmann::json::parse(text)); },
        py::arg("text"));
  m.def("load_program_file", &load_program_file, py::arg("path"));
  m.def("gen_random", [](uint64_t seed) { return gen_random(seed); }, py::arg("seed"));
  m.def("has_post_race", &has_post_race);

  m.def(
      "explore",
      [](const Program &p, const std::string &algo, bool rr, bool li, bool fork_hb, uint64_t cap) {
        py::gil_scoped_release nogil;
        return stats_to_json(p, explore(p, parse_algo(algo), options(rr, li, fork_hb, cap))).dump();
      },
      py::arg("program"), py::arg("algo") = "emdpor", py::arg("read_read_indep") = false,
      py::arg("lock_indep") = false, py::arg("fork_hb") = true, py::arg("cap") = 2'000'000);

  m.def(
      "enumerate",
      [](const Program &p, uint64_t cap) {
        std::vector<std::vector<std::string>> out;
        for (const auto &w : enumerate_all(p, initial_state(p), cap)) {
          std::vector<std::string> ls;
          for (const auto &r : w) ls.push_back(label(p, r));
          out.push_back(std::move(ls));
        }
        return out;
      },
      py::arg("program"), py::arg("cap") = 2'000'000);

  m.def(
      "verify_dcs",
      [](const Program &p, const std::string &algo, bool rr, bool li, bool fork_hb, uint64_t cap) {
        py::gil_scoped_release nogil;
        Algo a = parse_algo(algo);
        auto o = options(rr, li, fork_hb, cap);
        auto rep = verify_dcs(p, explored(p, a, o), o.dependence(a != Algo::dpor), cap);
        return std::tuple{rep.ok, rep.states_checked, rep.sequences_checked, rep.witness};
      },
      py::arg("program"), py::arg("algo") = "emdpor", py::arg("read_read_indep") = false,
      py::arg("lock_indep") = false, py::arg("fork_hb") = true, py::arg("cap") = 2'000'000);

  m.def(
      "check_covering_set",
      [](const Program &p, const std::vector<std::string> &threads, uint64_t cap) {
        State s = initial_state(p);
        std::vector<Transition> firsts;
        for (const auto &id : threads) {
          auto t = p.thread_index(id);
          if (!t) throw std::invalid_argument("unknown thread '" + id + "'");
          auto r = next_transition(p, s, *t);
          if (!r || !is_enabled(p, s, *r)) throw std::invalid_argument("thread '" + id + "' is not enabled");
          firsts.push_back(*r);
        }
        auto rep = check_covering_set(p, s, firsts, DependenceOptions{}, cap);
        return std::pair{rep.ok, rep.witness};
      },
      py::arg("program"), py::arg("threads"), py::arg("cap") = 2'000'000);
}
