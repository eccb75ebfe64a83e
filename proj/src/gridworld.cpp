#include "attnplan/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace attnplan {

namespace {

using nlohmann::json;

constexpr double kSlipTol = 1e-12;

// Action deltas for N, S, E, W with y growing northward.
constexpr int kDx[4] = {0, 0, 1, -1};
constexpr int kDy[4] = {1, -1, 0, 0};
// Perpendicular slip directions per action.
constexpr int kLateral[4][2] = {{2, 3}, {2, 3}, {0, 1}, {0, 1}};

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw ValidationError(field + ": " + why);
}

void expect_keys(const json& node, const std::string& where,
                 std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : node.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end())
            fail(where.empty() ? key : where + "." + key, "unknown field");
    }
}

Cell parse_cell(const json& node, const std::string& field) {
    if (!node.is_array() || node.size() != 2 || !node[0].is_number_integer() ||
        !node[1].is_number_integer())
        fail(field, "expected [x, y] with integer coordinates");
    return Cell{node[0].get<int>(), node[1].get<int>()};
}

double parse_number(const json& node, const std::string& field) {
    if (!node.is_number()) fail(field, "expected a number");
    return node.get<double>();
}

std::string cell_label(Cell c) {
    return std::to_string(c.x) + "," + std::to_string(c.y);
}

} // namespace

void GridworldSpec::validate() const {
    if (width < 1) fail("grid.width", "must be at least 1");
    if (height < 1) fail("grid.height", "must be at least 1");
    auto in_bounds = [&](Cell c) { return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height; };
    auto is_wall = [&](Cell c) {
        return std::find(walls.begin(), walls.end(), c) != walls.end();
    };
    for (const Cell& w : walls)
        if (!in_bounds(w)) fail("walls", "cell [" + cell_label(w) + "] outside the grid");
    if (static_cast<int>(walls.size()) >= width * height)
        fail("walls", "no free cell remains");
    for (const PenaltySpec& p : penalties) {
        if (!in_bounds(p.cell) || is_wall(p.cell))
            fail("penalties", "cell [" + cell_label(p.cell) + "] is not a free cell");
        if (!std::isfinite(p.reward)) fail("penalties.reward", "must be finite");
    }
    if (!in_bounds(robot_start) || is_wall(robot_start))
        fail("robot.start", "must be a free cell");
    if (slip_main < 0.0 || slip_side < 0.0) fail("robot", "slip probabilities must be non-negative");
    if (std::abs(slip_main + 2.0 * slip_side - 1.0) > kSlipTol)
        fail("robot", "slip_main + 2*slip_side must equal 1");
    if (agents.empty()) fail("agents", "at least one agent required");
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const std::string field = "agents[" + std::to_string(i) + "]";
        if (!in_bounds(agents[i].start) || is_wall(agents[i].start))
            fail(field + ".start", "must be a free cell");
        if (agents[i].dynamics != "uniform-neighbor" && agents[i].dynamics != "stationary")
            fail(field + ".dynamics", "unknown rule '" + agents[i].dynamics + "'");
    }
    if (capture_epsilon < 0.0) fail("capture.epsilon", "must be non-negative");
    if (!(capture_prob > 0.0 && capture_prob <= 1.0)) fail("capture.prob", "must lie in (0, 1]");
    if (!std::isfinite(capture_reward)) fail("capture.reward", "must be finite");
    const int n_vars = static_cast<int>(agents.size()) + 1;
    if (static_cast<int>(sensor_costs.size()) != n_vars)
        fail("sensors.costs", "need one entry per state variable (robot first)");
    for (double c : sensor_costs)
        if (c < 0.0 || !std::isfinite(c)) fail("sensors.costs", "must be non-negative");
    if (attention_modes.empty()) fail("attention.modes", "at least one mode required");
    for (std::size_t k = 0; k < attention_modes.size(); ++k) {
        const std::string field = "attention.modes[" + std::to_string(k) + "]";
        const auto& vars = attention_modes[k];
        if (vars.empty()) fail(field, "mode must attend at least one variable");
        for (int v : vars)
            if (v < 0 || v >= n_vars) fail(field, "variable index out of range");
        auto sorted = vars;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            fail(field, "duplicate variable index");
    }
    if (!(discount > 0.0 && discount <= 1.0)) fail("discount", "must lie in (0, 1]");
}

GridworldSpec load_spec(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("top-level JSON value must be an object");

    expect_keys(doc, "",
                {"grid", "walls", "penalties", "robot", "agents", "capture", "sensors",
                 "attention", "discount", "penalty_on_entry_only", "absorb_on_completion"});

    GridworldSpec spec;
    if (!doc.contains("grid") || !doc["grid"].is_object()) fail("grid", "required object");
    expect_keys(doc["grid"], "grid", {"width", "height"});
    if (!doc["grid"].contains("width") || !doc["grid"]["width"].is_number_integer())
        fail("grid.width", "required integer");
    if (!doc["grid"].contains("height") || !doc["grid"]["height"].is_number_integer())
        fail("grid.height", "required integer");
    spec.width = doc["grid"]["width"].get<int>();
    spec.height = doc["grid"]["height"].get<int>();

    if (doc.contains("walls")) {
        if (!doc["walls"].is_array()) fail("walls", "expected an array of cells");
        for (const auto& w : doc["walls"]) spec.walls.push_back(parse_cell(w, "walls"));
    }
    if (doc.contains("penalties")) {
        if (!doc["penalties"].is_array()) fail("penalties", "expected an array");
        for (const auto& p : doc["penalties"]) {
            if (!p.is_object()) fail("penalties", "expected objects with cell and reward");
            expect_keys(p, "penalties", {"cell", "reward"});
            PenaltySpec entry;
            if (!p.contains("cell")) fail("penalties.cell", "required");
            entry.cell = parse_cell(p["cell"], "penalties.cell");
            if (p.contains("reward")) entry.reward = parse_number(p["reward"], "penalties.reward");
            spec.penalties.push_back(entry);
        }
    }

    if (!doc.contains("robot") || !doc["robot"].is_object()) fail("robot", "required object");
    expect_keys(doc["robot"], "robot", {"start", "slip_main", "slip_side"});
    if (!doc["robot"].contains("start")) fail("robot.start", "required");
    spec.robot_start = parse_cell(doc["robot"]["start"], "robot.start");
    if (doc["robot"].contains("slip_main"))
        spec.slip_main = parse_number(doc["robot"]["slip_main"], "robot.slip_main");
    if (doc["robot"].contains("slip_side"))
        spec.slip_side = parse_number(doc["robot"]["slip_side"], "robot.slip_side");

    if (!doc.contains("agents") || !doc["agents"].is_array()) fail("agents", "required array");
    for (std::size_t i = 0; i < doc["agents"].size(); ++i) {
        const auto& a = doc["agents"][i];
        const std::string field = "agents[" + std::to_string(i) + "]";
        if (!a.is_object()) fail(field, "expected an object");
        expect_keys(a, field, {"start", "dynamics"});
        AgentSpec agent;
        if (!a.contains("start")) fail(field + ".start", "required");
        agent.start = parse_cell(a["start"], field + ".start");
        if (a.contains("dynamics")) {
            if (!a["dynamics"].is_string()) fail(field + ".dynamics", "expected a string");
            agent.dynamics = a["dynamics"].get<std::string>();
        }
        spec.agents.push_back(std::move(agent));
    }

    if (doc.contains("capture")) {
        if (!doc["capture"].is_object()) fail("capture", "expected an object");
        expect_keys(doc["capture"], "capture", {"epsilon", "prob", "reward"});
        if (doc["capture"].contains("epsilon"))
            spec.capture_epsilon = parse_number(doc["capture"]["epsilon"], "capture.epsilon");
        if (doc["capture"].contains("prob"))
            spec.capture_prob = parse_number(doc["capture"]["prob"], "capture.prob");
        if (doc["capture"].contains("reward"))
            spec.capture_reward = parse_number(doc["capture"]["reward"], "capture.reward");
    }

    const int n_vars = static_cast<int>(spec.agents.size()) + 1;
    if (doc.contains("sensors")) {
        if (!doc["sensors"].is_object()) fail("sensors", "expected an object");
        expect_keys(doc["sensors"], "sensors", {"costs"});
        if (!doc["sensors"].contains("costs") || !doc["sensors"]["costs"].is_array())
            fail("sensors.costs", "required array");
        for (const auto& c : doc["sensors"]["costs"])
            spec.sensor_costs.push_back(parse_number(c, "sensors.costs"));
    } else {
        spec.sensor_costs.assign(n_vars, 0.0);
    }

    if (doc.contains("attention")) {
        if (!doc["attention"].is_object()) fail("attention", "expected an object");
        expect_keys(doc["attention"], "attention", {"modes"});
        if (!doc["attention"].contains("modes") || !doc["attention"]["modes"].is_array())
            fail("attention.modes", "required array");
        for (const auto& m : doc["attention"]["modes"]) {
            if (!m.is_array()) fail("attention.modes", "each mode is an array of variable indices");
            std::vector<int> vars;
            for (const auto& v : m) {
                if (!v.is_number_integer()) fail("attention.modes", "variable indices are integers");
                vars.push_back(v.get<int>());
            }
            spec.attention_modes.push_back(std::move(vars));
        }
    } else {
        for (int i = 1; i < n_vars; ++i) spec.attention_modes.push_back({0, i});
    }

    if (doc.contains("discount")) spec.discount = parse_number(doc["discount"], "discount");
    if (doc.contains("penalty_on_entry_only")) {
        if (!doc["penalty_on_entry_only"].is_boolean()) fail("penalty_on_entry_only", "expected a boolean");
        spec.penalty_on_entry_only = doc["penalty_on_entry_only"].get<bool>();
    }
    if (doc.contains("absorb_on_completion")) {
        if (!doc["absorb_on_completion"].is_boolean()) fail("absorb_on_completion", "expected a boolean");
        spec.absorb_on_completion = doc["absorb_on_completion"].get<bool>();
    }

    spec.validate();
    return spec;
}

GridworldSpec load_spec_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_spec(buffer.str());
}

int CompiledWorld::cell_index(Cell c) const {
    if (c.x < 0 || c.x >= spec.width || c.y < 0 || c.y >= spec.height) return -1;
    return cell_lookup_[static_cast<std::size_t>(c.y) * spec.width + c.x];
}

bool CompiledWorld::all_captured(const StateTuple& t) const {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] != captured_value()) return false;
    return true;
}

double CompiledWorld::penalty_at(int cell_index, int previous_cell_index) const {
    if (spec.penalty_on_entry_only && cell_index == previous_cell_index) return 0.0;
    return penalty_[cell_index];
}

bool CompiledWorld::capture_possible(int robot_cell, int agent_cell) const {
    const Cell r = cells_[robot_cell];
    const Cell a = cells_[agent_cell];
    const double dx = r.x - a.x;
    const double dy = r.y - a.y;
    return dx * dx + dy * dy <= spec.capture_epsilon * spec.capture_epsilon + 1e-9;
}

CompiledWorld compile(const GridworldSpec& spec, std::size_t max_states) {
    spec.validate();

    CompiledWorld world;
    world.spec = spec;
    // Canonical attended order inside each mode.
    for (auto& mode : world.spec.attention_modes) std::sort(mode.begin(), mode.end());

    world.cell_lookup_.assign(static_cast<std::size_t>(spec.width) * spec.height, -1);
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            const Cell c{x, y};
            if (std::find(spec.walls.begin(), spec.walls.end(), c) != spec.walls.end()) continue;
            world.cell_lookup_[static_cast<std::size_t>(y) * spec.width + x] =
                static_cast<int>(world.cells_.size());
            world.cells_.push_back(c);
        }
    const int n_cells = world.num_cells();
    const int captured = n_cells;
    const int n_agents = static_cast<int>(spec.agents.size());
    const int n_actions = static_cast<int>(gridworld_actions().size());

    world.penalty_.assign(n_cells, 0.0);
    for (const PenaltySpec& p : spec.penalties)
        world.penalty_[world.cell_index(p.cell)] += p.reward;

    // Movement tables. A blocked or out-of-grid target folds back into staying.
    auto resolved = [&](int cell, int dir) {
        const Cell from = world.cells_[cell];
        const int target = world.cell_index(Cell{from.x + kDx[dir], from.y + kDy[dir]});
        return target < 0 ? cell : target;
    };
    world.robot_move_.assign(n_actions, {});
    for (int a = 0; a < n_actions; ++a) {
        world.robot_move_[a].resize(n_cells);
        for (int c = 0; c < n_cells; ++c) {
            std::vector<std::pair<int, double>> row;
            auto add = [&](int target, double p) {
                if (p == 0.0) return;
                for (auto& [cell2, mass] : row)
                    if (cell2 == target) {
                        mass += p;
                        return;
                    }
                row.emplace_back(target, p);
            };
            add(resolved(c, a), spec.slip_main);
            add(resolved(c, kLateral[a][0]), spec.slip_side);
            add(resolved(c, kLateral[a][1]), spec.slip_side);
            world.robot_move_[a][c] = std::move(row);
        }
    }
    world.agent_move_.assign(n_agents, {});
    for (int i = 0; i < n_agents; ++i) {
        world.agent_move_[i].resize(n_cells);
        for (int c = 0; c < n_cells; ++c) {
            std::vector<std::pair<int, double>> row;
            if (spec.agents[i].dynamics == "stationary") {
                row.emplace_back(c, 1.0);
            } else {
                auto add = [&](int target, double p) {
                    for (auto& [cell2, mass] : row)
                        if (cell2 == target) {
                            mass += p;
                            return;
                        }
                    row.emplace_back(target, p);
                };
                for (int dir = 0; dir < 4; ++dir) add(resolved(c, dir), 0.25);
            }
            world.agent_move_[i][c] = std::move(row);
        }
    }

    // Variable descriptors: robot position, then one status per agent.
    std::vector<VariableSpec> variables;
    {
        VariableSpec robot{"robot", n_cells, {}};
        for (int c = 0; c < n_cells; ++c) robot.value_labels.push_back(cell_label(world.cells_[c]));
        variables.push_back(std::move(robot));
        for (int i = 0; i < n_agents; ++i) {
            VariableSpec agent{"agent" + std::to_string(i + 1), n_cells + 1, {}};
            for (int c = 0; c < n_cells; ++c)
                agent.value_labels.push_back(cell_label(world.cells_[c]));
            agent.value_labels.push_back("captured");
            variables.push_back(std::move(agent));
        }
    }

    // Conditional tables: the robot depends on its own previous position and
    // the action; each agent on its previous status and the robot's next
    // position, which decides the capture check.
    std::vector<ConditionalTable> tables(1 + n_agents);
    tables[0].prev_parents = {0};
    tables[0].action_dependent = true;
    tables[0].rows.assign(n_actions, {});
    for (int a = 0; a < n_actions; ++a) {
        tables[0].rows[a].resize(n_cells);
        for (int c = 0; c < n_cells; ++c) tables[0].rows[a][c] = world.robot_move_[a][c];
    }
    for (int i = 0; i < n_agents; ++i) {
        ConditionalTable& table = tables[1 + i];
        table.prev_parents = {1 + i};
        table.next_parents = {0};
        table.rows.assign(1, {});
        table.rows[0].resize(static_cast<std::size_t>(n_cells + 1) * n_cells);
        for (int status = 0; status <= n_cells; ++status) {
            for (int robot_next = 0; robot_next < n_cells; ++robot_next) {
                const std::size_t context =
                    static_cast<std::size_t>(status) * n_cells + robot_next;
                auto& dist = table.rows[0][context];
                if (status == captured) {
                    dist.emplace_back(captured, 1.0);
                    continue;
                }
                double caught = 0.0;
                for (const auto& [target, p] : world.agent_move_[i][status]) {
                    if (world.capture_possible(robot_next, target)) {
                        caught += p * spec.capture_prob;
                        if (spec.capture_prob < 1.0)
                            dist.emplace_back(target, p * (1.0 - spec.capture_prob));
                    } else {
                        dist.emplace_back(target, p);
                    }
                }
                if (caught > 0.0) dist.emplace_back(captured, caught);
            }
        }
    }
    world.dbn = DbnModel(variables, gridworld_actions(), std::move(tables));

    // Expected immediate reward: capture payouts plus the penalty of the cell
    // the robot lands on. Completed states earn nothing.
    auto reward = [&](const StateTuple& x, int a) {
        if (world.all_captured(x)) return 0.0;
        double total = 0.0;
        for (const auto& [robot_next, p_r] : world.robot_move_[a][x[0]]) {
            double step = world.penalty_at(robot_next, x[0]);
            for (int i = 0; i < n_agents; ++i) {
                if (x[1 + i] == captured) continue;
                double caught = 0.0;
                for (const auto& [target, p_a] : world.agent_move_[i][x[1 + i]])
                    if (world.capture_possible(robot_next, target)) caught += p_a;
                step += spec.capture_reward * spec.capture_prob * caught;
            }
            total += p_r * step;
        }
        return total;
    };

    auto expand = [&](const StateTuple& x, int a) -> std::vector<std::pair<StateTuple, double>> {
        if (spec.absorb_on_completion && world.all_captured(x)) return {{x, 1.0}};
        return world.dbn.expand(x, a);
    };

    StateTuple initial;
    initial.push_back(world.cell_index(spec.robot_start));
    for (const AgentSpec& agent : spec.agents) initial.push_back(world.cell_index(agent.start));

    world.mdp = build_reachable_mdp(variables, gridworld_actions(), initial, spec.discount,
                                    expand, reward, max_states);

    for (std::size_t k = 0; k < world.spec.attention_modes.size(); ++k)
        world.modes.emplace_back(static_cast<int>(k) + 1, world.spec.attention_modes[k],
                                 spec.sensor_costs);
    return world;
}

} // namespace attnplan
