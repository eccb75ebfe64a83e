#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "attnplan/mdp.hpp"
#include "attnplan/rollout.hpp"
#include "attnplan/shift.hpp"

namespace attnplan {

/// Shortest decimal round-trip representation (up to 17 significant digits).
std::string format_double(double v);

/// State tuple rendered with the variables' value labels when present.
nlohmann::json state_json(const FactoredMdp& mdp, int state);

/// Per-state solution export: tuple, chosen mode and duration, weighted value
/// and both objective components.
nlohmann::json solution_json(const FactoredMdp& mdp, const ShiftSolution& solution);

/// Shift policy plus each mode's subpolicy as action names.
nlohmann::json policy_json(const FactoredMdp& mdp, const std::vector<AttentionalMdp>& modes,
                           const ShiftSolution& solution);

nlohmann::json returns_json(const ReturnsReport& report);

/// Header "t,mode,j,full_obs,reward,info_reward", one row per step.
std::string timeline_csv(const TrajectoryLog& log);

/// Header "T,G0,I0,V0,max_t_used", one row per sustain bound.
std::string sweep_csv(const std::vector<ShiftSolution>& per_bound, int initial_state);

/// Header "w1,w2,G0,I0", one row per weight vector.
std::string pareto_csv(const std::vector<ParetoPoint>& points);

/// Writes via a temporary file in the same directory plus an atomic rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace attnplan
