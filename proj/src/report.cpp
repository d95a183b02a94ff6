#include "evex/report.hpp"

namespace evex {

nlohmann::json cycle_to_json(const Program &p, const DeadlockCycle &c) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto &m : c.members) j.push_back(label(p, m));
  return j;
}

nlohmann::json stats_to_json(const Program &p, const ExplorationStats &st) {
  nlohmann::json j;
  j["algo"] = algo_name(st.algo);
  j["traces"] = st.traces;
  j["transitions"] = st.transitions;
  j["distinct_transitions"] = st.distinct_transitions;
  j["time_ms"] = st.time_ms;
  j["cap_exceeded"] = st.cap_exceeded;
  j["deadlock_cycles"] = nlohmann::json::array();
  for (const auto &[key, c] : st.deadlock_cycles) j["deadlock_cycles"].push_back(cycle_to_json(p, c));
  j["asserts"] = nlohmann::json::array();
  for (int a : st.asserts) j["asserts"].push_back(p.assert_names[a]);
  return j;
}

std::vector<std::string> hb_edges(const Program &p, const RecordedSequence &seq, const DependenceOptions &o) {
  HbTracker hb(p, o);
  std::vector<std::optional<int>> rp(seq.steps.size());
  for (auto [k, j] : seq.rp_edges) rp[j] = k;
  for (size_t i = 0; i < seq.steps.size(); ++i) hb.push(seq.steps[i], rp[i]);
  std::vector<std::string> out;
  for (int i = 0; i < hb.size(); ++i)
    for (int j = i + 1; j < hb.size(); ++j)
      if (hb.hb(i, j)) out.push_back(std::to_string(i) + " -> " + std::to_string(j));
  return out;
}

} // namespace evex
