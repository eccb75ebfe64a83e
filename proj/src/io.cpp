#include "attnplan/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace attnplan {

using nlohmann::json;

std::string format_double(double v) {
    // Shortest representation that parses back to the same double.
    char buf[64];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

json state_json(const FactoredMdp& mdp, int state) {
    json out = json::array();
    const StateTuple& tuple = mdp.state(state);
    for (int v = 0; v < mdp.num_variables(); ++v) {
        const auto& labels = mdp.variables()[v].value_labels;
        if (labels.empty())
            out.push_back(tuple[v]);
        else
            out.push_back(labels[tuple[v]]);
    }
    return out;
}

json solution_json(const FactoredMdp& mdp, const ShiftSolution& solution) {
    json states = json::array();
    for (int s = 0; s < mdp.num_states(); ++s) {
        states.push_back(json{{"state", state_json(mdp, s)},
                              {"mode", solution.policy[s].mode},
                              {"duration", solution.policy[s].duration},
                              {"value", solution.value[s]},
                              {"goal_value", solution.goal_value[s]},
                              {"info_value", solution.info_value[s]}});
    }
    return json{{"weights", solution.weights},
                {"discount", mdp.discount()},
                {"residual", solution.residual},
                {"sweeps", solution.sweeps},
                {"max_duration_used", solution.max_duration_used},
                {"initial_state", state_json(mdp, mdp.initial_state())},
                {"states", std::move(states)}};
}

json policy_json(const FactoredMdp& mdp, const std::vector<AttentionalMdp>& modes,
                 const ShiftSolution& solution) {
    json shift = json::array();
    for (int s = 0; s < mdp.num_states(); ++s)
        shift.push_back(json{{"state", state_json(mdp, s)},
                             {"mode", solution.policy[s].mode},
                             {"duration", solution.policy[s].duration}});
    json subpolicies = json::array();
    for (const auto& am : modes) {
        json entries = json::array();
        for (int y = 0; y < am.model.num_states(); ++y)
            entries.push_back(json{{"state", state_json(am.model, y)},
                                   {"action", am.model.actions()[am.subpolicy.action(y)]}});
        subpolicies.push_back(json{{"mode", am.mode.index()},
                                   {"attended", am.mode.attended()},
                                   {"deactivation_reward", am.mode.deactivation_reward()},
                                   {"actions", std::move(entries)}});
    }
    return json{{"shift_policy", std::move(shift)}, {"subpolicies", std::move(subpolicies)}};
}

json returns_json(const ReturnsReport& report) {
    auto estimate = [](const ReturnEstimate& e) {
        return json{{"mean", e.mean}, {"std_error", e.std_error}, {"ci", e.ci}};
    };
    return json{{"goal", estimate(report.goal)},
                {"info", estimate(report.info)},
                {"tail_bound", report.tail_bound},
                {"rollouts", report.rollouts},
                {"horizon", report.horizon},
                {"seed", report.seed}};
}

std::string timeline_csv(const TrajectoryLog& log) {
    std::ostringstream out;
    out << "t,mode,j,full_obs,reward,info_reward\n";
    for (const StepRecord& rec : log.steps) {
        out << rec.time << ',' << rec.mode << ',' << rec.phase_step << ','
            << (rec.full_obs ? 1 : 0) << ',' << format_double(rec.reward) << ','
            << format_double(rec.info_reward) << '\n';
    }
    return out.str();
}

std::string sweep_csv(const std::vector<ShiftSolution>& per_bound, int initial_state) {
    std::ostringstream out;
    out << "T,G0,I0,V0,max_t_used\n";
    for (std::size_t i = 0; i < per_bound.size(); ++i) {
        const ShiftSolution& sol = per_bound[i];
        out << (i + 1) << ',' << format_double(sol.goal_value[initial_state]) << ','
            << format_double(sol.info_value[initial_state]) << ','
            << format_double(sol.value[initial_state]) << ',' << sol.max_duration_used << '\n';
    }
    return out.str();
}

std::string pareto_csv(const std::vector<ParetoPoint>& points) {
    std::ostringstream out;
    out << "w1,w2,G0,I0\n";
    for (const ParetoPoint& p : points) {
        out << format_double(p.weights[0]) << ',' << format_double(p.weights[1]) << ','
            << format_double(p.goal_at_start) << ',' << format_double(p.info_at_start) << '\n';
    }
    return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    fs::create_directories(dir);
    const fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

} // namespace attnplan
