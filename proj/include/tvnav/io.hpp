#pragma once

#include "tvnav/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace tvnav {

using Json = nlohmann::json;

namespace detail {

inline void expect_object(const Json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError("config: " + path + " must be an object");
}

inline void reject_unknown(const Json& obj, const std::string& path,
                           std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return it.key() == k; }) == allowed.end()) {
            const std::string where = path.empty() ? it.key() : path + "." + it.key();
            throw ConfigError("config: unknown key '" + where + "'");
        }
    }
}

inline std::string joined(const std::string& path, const char* key) {
    return path.empty() ? key : path + "." + key;
}

inline double num_req(const Json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError("config: missing required key '" + joined(path, key) + "'");
    }
    if (!it->is_number()) {
        throw ConfigError("config: key '" + joined(path, key) + "' must be a number");
    }
    return it->get<double>();
}

inline double num_or(const Json& obj, const std::string& path, const char* key, double dflt) {
    if (obj.find(key) == obj.end()) return dflt;
    return num_req(obj, path, key);
}

inline std::int64_t int_or(const Json& obj, const std::string& path, const char* key,
                           std::int64_t dflt) {
    auto it = obj.find(key);
    if (it == obj.end()) return dflt;
    if (!it->is_number_integer()) {
        throw ConfigError("config: key '" + joined(path, key) + "' must be an integer");
    }
    return it->get<std::int64_t>();
}

inline std::string string_or(const Json& obj, const std::string& path, const char* key,
                             std::string dflt) {
    auto it = obj.find(key);
    if (it == obj.end()) return dflt;
    if (!it->is_string()) {
        throw ConfigError("config: key '" + joined(path, key) + "' must be a string");
    }
    return it->get<std::string>();
}

inline SfmParams sfm_from_json(const Json& obj, const std::string& path) {
    expect_object(obj, path);
    reject_unknown(obj, path,
                   {"goal_gain_hz", "desired_speed_m_s", "repulsion_strength_m_s2",
                    "repulsion_range_m", "obstacle_strength_m_s2", "obstacle_range_m",
                    "max_speed_m_s"});
    SfmParams p;
    p.goal_gain = num_or(obj, path, "goal_gain_hz", p.goal_gain);
    p.desired_speed = num_or(obj, path, "desired_speed_m_s", p.desired_speed);
    p.repulsion_strength = num_or(obj, path, "repulsion_strength_m_s2", p.repulsion_strength);
    p.repulsion_range = num_or(obj, path, "repulsion_range_m", p.repulsion_range);
    p.obstacle_strength = num_or(obj, path, "obstacle_strength_m_s2", p.obstacle_strength);
    p.obstacle_range = num_or(obj, path, "obstacle_range_m", p.obstacle_range);
    p.max_speed = num_or(obj, path, "max_speed_m_s", p.max_speed);
    return p;
}

}  // namespace detail

/// Builds a Scenario from a parsed config document. Unknown keys anywhere in
/// the document are rejected by name; missing optional keys take the
/// documented defaults; the result is validated before it is returned.
inline Scenario scenario_from_json(const Json& doc) {
    using detail::expect_object;
    using detail::int_or;
    using detail::num_or;
    using detail::num_req;
    using detail::reject_unknown;
    using detail::string_or;

    expect_object(doc, "document");
    reject_unknown(doc, "",
                   {"version", "name", "grid", "obstacles", "robot", "agents", "disturbance",
                    "noise", "sfm_true", "sfm_belief", "actions", "planner", "reward", "episode"});

    const std::int64_t version = int_or(doc, "", "version", 0);
    if (version != 1) throw ConfigError("config: 'version' must be present and equal to 1");

    Scenario sc;
    sc.name = string_or(doc, "", "name", "scenario");

    {
        auto it = doc.find("grid");
        if (it == doc.end()) throw ConfigError("config: missing required key 'grid'");
        expect_object(*it, "grid");
        reject_unknown(*it, "grid",
                       {"origin_x_m", "origin_y_m", "extent_x_m", "extent_y_m", "cell_size_m"});
        sc.grid_origin = Vec2(num_or(*it, "grid", "origin_x_m", 0.0),
                              num_or(*it, "grid", "origin_y_m", 0.0));
        sc.grid_extent = Vec2(num_req(*it, "grid", "extent_x_m"),
                              num_req(*it, "grid", "extent_y_m"));
        sc.cell_size = num_req(*it, "grid", "cell_size_m");
    }

    if (auto it = doc.find("obstacles"); it != doc.end()) {
        if (!it->is_array()) throw ConfigError("config: 'obstacles' must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const Json& entry = (*it)[i];
            const std::string path = "obstacles." + std::to_string(i);
            expect_object(entry, path);
            reject_unknown(entry, path, {"min_x_m", "min_y_m", "max_x_m", "max_y_m"});
            Box box;
            box.lo = Vec2(num_req(entry, path, "min_x_m"), num_req(entry, path, "min_y_m"));
            box.hi = Vec2(num_req(entry, path, "max_x_m"), num_req(entry, path, "max_y_m"));
            if (box.hi.x() < box.lo.x() || box.hi.y() < box.lo.y()) {
                throw ConfigError("config: " + path + " has max below min");
            }
            sc.obstacles.push_back(box);
        }
    }

    {
        auto it = doc.find("robot");
        if (it == doc.end()) throw ConfigError("config: missing required key 'robot'");
        expect_object(*it, "robot");
        reject_unknown(*it, "robot", {"start_x_m", "start_y_m", "goal_x_m", "goal_y_m"});
        sc.robot_start = Vec2(num_req(*it, "robot", "start_x_m"),
                              num_req(*it, "robot", "start_y_m"));
        sc.robot_goal = Vec2(num_req(*it, "robot", "goal_x_m"),
                             num_req(*it, "robot", "goal_y_m"));
    }

    sc.agents.clear();
    if (auto it = doc.find("agents"); it != doc.end()) {
        if (!it->is_array()) throw ConfigError("config: 'agents' must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const Json& entry = (*it)[i];
            const std::string path = "agents." + std::to_string(i);
            expect_object(entry, path);
            reject_unknown(entry, path, {"start_x_m", "start_y_m", "goal_x_m", "goal_y_m"});
            AgentSpec spec;
            spec.start = Vec2(num_req(entry, path, "start_x_m"),
                              num_req(entry, path, "start_y_m"));
            spec.goal = Vec2(num_req(entry, path, "goal_x_m"), num_req(entry, path, "goal_y_m"));
            sc.agents.push_back(spec);
        }
    }

    if (auto it = doc.find("disturbance"); it != doc.end()) {
        expect_object(*it, "disturbance");
        const std::string kind = string_or(*it, "disturbance", "kind", "none");
        if (kind == "none") {
            reject_unknown(*it, "disturbance", {"kind"});
            sc.field.kind = FieldKind::None;
        } else if (kind == "gyre") {
            reject_unknown(*it, "disturbance", {"kind", "amplitude_m_s", "size_m"});
            sc.field.kind = FieldKind::Gyre;
            sc.field.gyre.amplitude =
                num_or(*it, "disturbance", "amplitude_m_s", sc.field.gyre.amplitude);
            sc.field.gyre.size = num_or(*it, "disturbance", "size_m", sc.field.gyre.size);
        } else if (kind == "vortex") {
            reject_unknown(*it, "disturbance",
                           {"kind", "radius_m", "omega_rad_s", "center_x_m", "center_y_m"});
            sc.field.kind = FieldKind::DynamicVortex;
            sc.field.vortex.radius = num_or(*it, "disturbance", "radius_m", sc.field.vortex.radius);
            sc.field.vortex.omega =
                num_or(*it, "disturbance", "omega_rad_s", sc.field.vortex.omega);
            sc.field.vortex.center =
                Vec2(num_or(*it, "disturbance", "center_x_m", sc.field.vortex.center.x()),
                     num_or(*it, "disturbance", "center_y_m", sc.field.vortex.center.y()));
        } else {
            throw ConfigError("config: disturbance.kind must be none, gyre, or vortex");
        }
    }

    if (auto it = doc.find("noise"); it != doc.end()) {
        expect_object(*it, "noise");
        reject_unknown(*it, "noise", {"q_xx_m2", "q_xy_m2", "q_yy_m2"});
        Mat2 q;
        const double qxx = num_or(*it, "noise", "q_xx_m2", 1.0);
        const double qxy = num_or(*it, "noise", "q_xy_m2", 0.0);
        const double qyy = num_or(*it, "noise", "q_yy_m2", 1.0);
        q << qxx, qxy, qxy, qyy;
        sc.noise = NoiseModel(q);
    }

    if (auto it = doc.find("sfm_true"); it != doc.end()) {
        sc.sfm_true = detail::sfm_from_json(*it, "sfm_true");
    }
    if (auto it = doc.find("sfm_belief"); it != doc.end()) {
        sc.sfm_belief = detail::sfm_from_json(*it, "sfm_belief");
    } else {
        sc.sfm_belief = sc.sfm_true;
    }

    if (auto it = doc.find("actions"); it != doc.end()) {
        expect_object(*it, "actions");
        reject_unknown(*it, "actions", {"levels", "bound_m_s"});
        sc.action_levels = static_cast<int>(int_or(*it, "actions", "levels", sc.action_levels));
        sc.action_bound = num_or(*it, "actions", "bound_m_s", sc.action_bound);
    }

    if (auto it = doc.find("planner"); it != doc.end()) {
        expect_object(*it, "planner");
        reject_unknown(*it, "planner",
                       {"kind", "horizon_steps", "dt_s", "alpha", "gamma", "max_outer_iterations",
                        "time_budget_s"});
        sc.planner_kind = parse_planner(string_or(*it, "planner", "kind", "ours"));
        sc.planner.horizon =
            static_cast<int>(int_or(*it, "planner", "horizon_steps", sc.planner.horizon));
        sc.planner.dt = num_or(*it, "planner", "dt_s", sc.planner.dt);
        sc.planner.alpha = num_or(*it, "planner", "alpha", sc.planner.alpha);
        sc.planner.gamma = num_or(*it, "planner", "gamma", sc.planner.gamma);
        sc.planner.max_outer_iterations = static_cast<int>(
            int_or(*it, "planner", "max_outer_iterations", sc.planner.max_outer_iterations));
        sc.planner.time_budget_s =
            num_or(*it, "planner", "time_budget_s", sc.planner.time_budget_s);
    }

    if (auto it = doc.find("reward"); it != doc.end()) {
        expect_object(*it, "reward");
        reject_unknown(*it, "reward",
                       {"collision_penalty", "occupancy_scale", "goal_bonus", "terminal_weight"});
        sc.reward.collision_penalty =
            num_or(*it, "reward", "collision_penalty", sc.reward.collision_penalty);
        sc.reward.occupancy_scale =
            num_or(*it, "reward", "occupancy_scale", sc.reward.occupancy_scale);
        sc.reward.goal_bonus = num_or(*it, "reward", "goal_bonus", sc.reward.goal_bonus);
        sc.reward.terminal_weight =
            num_or(*it, "reward", "terminal_weight", sc.reward.terminal_weight);
    }

    if (auto it = doc.find("episode"); it != doc.end()) {
        expect_object(*it, "episode");
        reject_unknown(*it, "episode",
                       {"step_cap", "collision_radius_m", "seed", "ersi_sequence_cap"});
        sc.step_cap = static_cast<int>(int_or(*it, "episode", "step_cap", sc.step_cap));
        sc.collision_radius =
            num_or(*it, "episode", "collision_radius_m", sc.collision_radius);
        const std::int64_t seed = int_or(*it, "episode", "seed", static_cast<std::int64_t>(sc.seed));
        if (seed < 0) throw ConfigError("config: episode.seed must be non-negative");
        sc.seed = static_cast<std::uint64_t>(seed);
        const std::int64_t cap =
            int_or(*it, "episode", "ersi_sequence_cap", static_cast<std::int64_t>(sc.ersi_sequence_cap));
        if (cap < 1) throw ConfigError("config: episode.ersi_sequence_cap must be positive");
        sc.ersi_sequence_cap = static_cast<std::uint64_t>(cap);
    }

    sc.validate();
    return sc;
}

/// Applies one `path.to.key=value` override to the raw document. Missing
/// objects along the path are created; array elements are addressed by index
/// and must already exist. Values parse as JSON scalars, with bare words
/// falling back to strings.
inline void apply_override(Json& doc, std::string_view spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override: expected key.path=value, got '" + std::string(spec) + "'");
    }
    const std::string_view path = spec.substr(0, eq);
    const std::string value(spec.substr(eq + 1));

    Json parsed = Json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;  // bare word, keep as string

    Json* node = &doc;
    std::size_t begin = 0;
    std::vector<std::string> segments;
    while (begin <= path.size()) {
        const std::size_t dot = path.find('.', begin);
        const std::string_view seg =
            path.substr(begin, dot == std::string_view::npos ? path.size() - begin : dot - begin);
        if (seg.empty()) throw ConfigError("override: empty path segment in '" + std::string(path) + "'");
        segments.emplace_back(seg);
        if (dot == std::string_view::npos) break;
        begin = dot + 1;
    }
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
        const std::string& seg = segments[i];
        if (node->is_array()) {
            const std::size_t index = std::stoul(seg);
            if (index >= node->size()) {
                throw ConfigError("override: array index out of range in '" + std::string(path) + "'");
            }
            node = &(*node)[index];
        } else {
            node = &(*node)[seg];
        }
    }
    const std::string& last = segments.back();
    if (node->is_array()) {
        const std::size_t index = std::stoul(last);
        if (index >= node->size()) {
            throw ConfigError("override: array index out of range in '" + std::string(path) + "'");
        }
        (*node)[index] = parsed;
    } else {
        (*node)[last] = parsed;
    }
}

/// Parses a config file, applies the overrides in order, and builds the
/// Scenario. Parse failures report the line; semantic failures name the key
/// or invariant.
inline Scenario load_scenario(const std::filesystem::path& path,
                              std::span<const std::string> overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        const std::size_t line =
            1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + std::min(e.byte, text.size()), '\n'));
        throw ConfigError("config: parse error in '" + path.string() + "' at line " +
                          std::to_string(line) + ": " + e.what());
    }
    for (const std::string& spec : overrides) apply_override(doc, spec);
    return scenario_from_json(doc);
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("io: cannot open '" + path.string() + "' for writing");
    return out;
}

inline void finish_out(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw ConfigError("io: write failed for '" + path.string() + "'");
}

}  // namespace detail

/// Comma-delimited trajectory with a header row. Column order:
/// step,time_s,x_m,y_m,vx_m_s,vy_m_s,stop, then agent<i>_x_m,agent<i>_y_m per
/// agent, then (only when include_plan_times) plan_s. Plan wall-clock values
/// vary run to run, so the column is opt-in to keep files byte-reproducible.
inline void write_trajectory(const EpisodeResult& result, const std::filesystem::path& path,
                             bool include_plan_times = false) {
    std::ofstream out = detail::open_out(path);
    const std::size_t agents = result.steps.empty() ? 0 : result.steps.front().agents.size();
    out << "step,time_s,x_m,y_m,vx_m_s,vy_m_s,stop";
    for (std::size_t i = 0; i < agents; ++i) {
        out << ",agent" << i << "_x_m,agent" << i << "_y_m";
    }
    if (include_plan_times) out << ",plan_s";
    out << "\n";
    for (const TrajectoryRecord& rec : result.steps) {
        out << rec.step << ',' << format_double(rec.time_s) << ',' << format_double(rec.robot.x())
            << ',' << format_double(rec.robot.y()) << ',' << format_double(rec.action.x()) << ','
            << format_double(rec.action.y()) << ',' << (rec.stopped ? 1 : 0);
        for (const Vec2& a : rec.agents) {
            out << ',' << format_double(a.x()) << ',' << format_double(a.y());
        }
        if (include_plan_times) out << ',' << format_double(rec.plan_seconds);
        out << "\n";
    }
    detail::finish_out(out, path);
}

struct ParsedTrajectory {
    std::vector<TrajectoryRecord> steps;
    bool has_plan_times = false;
};

inline ParsedTrajectory read_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("io: cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("io: '" + path.string() + "' is empty");

    auto split = [](const std::string& row) {
        std::vector<std::string> fields;
        std::size_t begin = 0;
        while (true) {
            const std::size_t comma = row.find(',', begin);
            fields.push_back(row.substr(begin, comma == std::string::npos ? std::string::npos
                                                                          : comma - begin));
            if (comma == std::string::npos) break;
            begin = comma + 1;
        }
        return fields;
    };

    const std::vector<std::string> header = split(line);
    ParsedTrajectory out;
    out.has_plan_times = !header.empty() && header.back() == "plan_s";
    const std::size_t fixed = 7 + (out.has_plan_times ? 1 : 0);
    if (header.size() < fixed || (header.size() - fixed) % 2 != 0) {
        throw ConfigError("io: '" + path.string() + "' has an unrecognized header");
    }
    const std::size_t agents = (header.size() - fixed) / 2;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split(line);
        if (fields.size() != header.size()) {
            throw ConfigError("io: '" + path.string() + "' row has wrong field count");
        }
        TrajectoryRecord rec;
        rec.step = static_cast<int>(parse_double(fields[0]));
        rec.time_s = parse_double(fields[1]);
        rec.robot = Vec2(parse_double(fields[2]), parse_double(fields[3]));
        rec.action = Vec2(parse_double(fields[4]), parse_double(fields[5]));
        rec.stopped = fields[6] == "1";
        for (std::size_t i = 0; i < agents; ++i) {
            rec.agents.emplace_back(parse_double(fields[7 + 2 * i]),
                                    parse_double(fields[8 + 2 * i]));
        }
        if (out.has_plan_times) rec.plan_seconds = parse_double(fields.back());
        out.steps.push_back(std::move(rec));
    }
    return out;
}

/// Campaign table: one row per (agent count, planner) with mean and stddev
/// of the episode metrics.
inline void write_metrics(std::span<const MetricAggregate> rows,
                          const std::filesystem::path& path) {
    std::ofstream out = detail::open_out(path);
    out << "planner,agents,trials,reached,mean_distance_m,std_distance_m,mean_time_s,std_time_s,"
           "mean_stops,std_stops,agent_stops,obstacle_stops\n";
    for (const MetricAggregate& row : rows) {
        out << planner_name(row.planner) << ',' << row.agent_count << ',' << row.trials << ','
            << row.reached << ',' << format_double(row.mean_distance_m) << ','
            << format_double(row.std_distance_m) << ',' << format_double(row.mean_time_s) << ','
            << format_double(row.std_time_s) << ',' << format_double(row.mean_stops) << ','
            << format_double(row.std_stops) << ',' << row.total_agent_stops << ','
            << row.total_obstacle_stops << "\n";
    }
    detail::finish_out(out, path);
}

/// Benchmark table: one row per (planner, sweep value).
inline void write_timing(const TimingTable& table, const std::filesystem::path& path) {
    std::ofstream out = detail::open_out(path);
    out << "sweep,planner,value,seconds,repetitions,sequences,status\n";
    for (const TimingEntry& e : table.entries) {
        out << sweep_name(table.sweep) << ',' << planner_name(e.planner) << ','
            << format_double(e.value) << ',' << format_double(e.seconds) << ',' << e.repetitions
            << ',' << e.sequences << ',' << timing_status_name(e.status) << "\n";
    }
    detail::finish_out(out, path);
}

}  // namespace tvnav
