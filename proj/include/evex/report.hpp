#pragma once

#include <json.hpp>

#include "evex/explore.hpp"

namespace evex {

nlohmann::json stats_to_json(const Program &p, const ExplorationStats &st);
nlohmann::json cycle_to_json(const Program &p, const DeadlockCycle &c);

/// Edges of the happens-before relation of a recorded sequence, one
/// "i -> j" string per ordered pair.
std::vector<std::string> hb_edges(const Program &p, const RecordedSequence &seq, const DependenceOptions &o);

} // namespace evex
