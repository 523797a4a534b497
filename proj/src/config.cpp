#include "mfrl/config.hpp"

#include <charconv>
#include <functional>
#include <set>
#include <sstream>

#include "mfrl/error.hpp"

namespace mfrl {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto at = s.find(sep, start);
        out.push_back(trim(s.substr(start, at == std::string_view::npos ? s.size() - start : at - start)));
        if (at == std::string_view::npos) break;
        start = at + 1;
    }
    return out;
}

[[noreturn]] void bad(int line, std::string_view key, std::string_view why) {
    throw ConfigError(line, std::string(key) + ": " + std::string(why));
}

double to_double(std::string_view v, int line, std::string_view key) {
    double x = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, x);
    if (v.empty() || ec != std::errc() || ptr != end) bad(line, key, "expected a number, got '" + std::string(v) + "'");
    return x;
}

long long to_integer(std::string_view v, int line, std::string_view key) {
    long long x = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, x);
    if (v.empty() || ec != std::errc() || ptr != end) bad(line, key, "expected an integer, got '" + std::string(v) + "'");
    return x;
}

int to_int(std::string_view v, int line, std::string_view key) {
    const long long x = to_integer(v, line, key);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) bad(line, key, "integer out of range");
    return static_cast<int>(x);
}

std::uint64_t to_u64(std::string_view v, int line, std::string_view key) {
    std::uint64_t x = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, x);
    if (v.empty() || ec != std::errc() || ptr != end) bad(line, key, "expected an unsigned integer, got '" + std::string(v) + "'");
    return x;
}

bool to_bool(std::string_view v, int line, std::string_view key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad(line, key, "expected true or false, got '" + std::string(v) + "'");
}

std::vector<double> to_doubles(std::string_view v, int line, std::string_view key) {
    std::vector<double> out;
    if (v.empty()) return out;
    for (auto part : split(v, ',')) out.push_back(to_double(part, line, key));
    return out;
}

Vec2 to_vec2(std::string_view v, int line, std::string_view key) {
    const auto xs = to_doubles(v, line, key);
    if (xs.size() != 2) bad(line, key, "expected x,y");
    return Vec2(xs[0], xs[1]);
}

std::vector<Vec2> to_vec2s(std::string_view v, int line, std::string_view key) {
    std::vector<Vec2> out;
    if (v.empty()) return out;
    for (auto part : split(v, ';')) out.push_back(to_vec2(part, line, key));
    return out;
}

std::string fmt(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string fmt(const Vec2& v) { return fmt(v.x()) + "," + fmt(v.y()); }

std::string fmt_list(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt(xs[i]);
    return s;
}

std::string fmt_list(const std::vector<Vec2>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "; " : "") + fmt(xs[i]);
    return s;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Entry {
    const char* key;
    std::function<void(RunConfig&, std::string_view, int)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define NUM_ENTRY(KEY, FIELD)                                                              \
    Entry {                                                                                \
        KEY, [](RunConfig& c, std::string_view v, int l) { c.FIELD = to_double(v, l, KEY); }, \
            [](const RunConfig& c) { return fmt(c.FIELD); }                                \
    }
#define INT_ENTRY(KEY, FIELD)                                                              \
    Entry {                                                                                \
        KEY, [](RunConfig& c, std::string_view v, int l) { c.FIELD = to_int(v, l, KEY); }, \
            [](const RunConfig& c) { return std::to_string(c.FIELD); }                     \
    }
#define BOOL_ENTRY(KEY, FIELD)                                                              \
    Entry {                                                                                 \
        KEY, [](RunConfig& c, std::string_view v, int l) { c.FIELD = to_bool(v, l, KEY); }, \
            [](const RunConfig& c) { return fmt_bool(c.FIELD); }                            \
    }
#define VEC2_ENTRY(KEY, FIELD)                                                              \
    Entry {                                                                                 \
        KEY, [](RunConfig& c, std::string_view v, int l) { c.FIELD = to_vec2(v, l, KEY); }, \
            [](const RunConfig& c) { return fmt(c.FIELD); }                                 \
    }

void set_peaks(RunConfig& c, const std::vector<Vec2>& peaks, double spread) {
    CongestionReward r;
    for (const auto& p : peaks) {
        r.components.push_back(
            {p, spread * Eigen::Matrix2d::Identity(), 1.0 / static_cast<double>(peaks.size())});
    }
    c.env.congestion = r;
}

std::vector<Vec2> peaks_of(const RunConfig& c) {
    std::vector<Vec2> out;
    for (const auto& b : c.env.congestion.components) out.push_back(b.mean);
    return out;
}

double peak_spread_of(const RunConfig& c) {
    const auto& comps = c.env.congestion.components;
    return comps.empty() ? 0.0 : comps.front().spread(0, 0);
}

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        {"agents",
         [](RunConfig& c, std::string_view v, int l) {
             const int n = to_int(v, l, "agents");
             if (n < 1) throw ConfigError(l, "agents must be ≥ 1");
             c.learner.agents = n;
         },
         [](const RunConfig& c) { return std::to_string(c.learner.agents); }},
        {"episodes",
         [](RunConfig& c, std::string_view v, int l) {
             const int n = to_int(v, l, "episodes");
             if (n < 0) throw ConfigError(l, "episodes must be ≥ 0");
             c.learner.episodes = n;
         },
         [](const RunConfig& c) { return std::to_string(c.learner.episodes); }},
        {"seed", [](RunConfig& c, std::string_view v, int l) { c.learner.seed = to_u64(v, l, "seed"); },
         [](const RunConfig& c) { return std::to_string(c.learner.seed); }},
        INT_ENTRY("repeats", repeats),
        INT_ENTRY("eval_agents", eval_agents),
        INT_ENTRY("window", window),
        INT_ENTRY("burn_in", burn_in),
        INT_ENTRY("snapshot_every", snapshot_every),
        {"out", [](RunConfig& c, std::string_view v, int) { c.out = std::string(v); },
         [](const RunConfig& c) { return c.out; }},

        INT_ENTRY("env.horizon", env.horizon),
        NUM_ENTRY("env.a", env.a),
        NUM_ENTRY("env.b", env.b),
        NUM_ENTRY("env.noise", env.noise),
        NUM_ENTRY("env.eta", env.eta),
        NUM_ENTRY("env.alpha", env.alpha),
        NUM_ENTRY("env.gamma", env.gamma),
        {"env.cost",
         [](RunConfig& c, std::string_view v, int l) {
             if (v == "quadratic") c.env.cost = CostShape::quadratic;
             else if (v == "quartic") c.env.cost = CostShape::quartic;
             else bad(l, "env.cost", "expected quadratic or quartic");
         },
         [](const RunConfig& c) {
             return std::string(c.env.cost == CostShape::quartic ? "quartic" : "quadratic");
         }},
        VEC2_ENTRY("env.init_mean", env.init_mean),
        NUM_ENTRY("env.init_std", env.init_std),
        {"env.peaks",
         [](RunConfig& c, std::string_view v, int l) {
             const auto peaks = to_vec2s(v, l, "env.peaks");
             if (peaks.empty()) bad(l, "env.peaks", "need at least one peak");
             set_peaks(c, peaks, peak_spread_of(c));
         },
         [](const RunConfig& c) { return fmt_list(peaks_of(c)); }},
        {"env.peak_spread",
         [](RunConfig& c, std::string_view v, int l) {
             set_peaks(c, peaks_of(c), to_double(v, l, "env.peak_spread"));
         },
         [](const RunConfig& c) { return fmt(peak_spread_of(c)); }},
        {"env.waypoints",
         [](RunConfig& c, std::string_view v, int l) {
             DemandPath path;
             if (v.empty()) {
                 c.env.demand_path = path;
                 return;
             }
             for (auto part : split(v, ';')) {
                 const auto colon = part.find(':');
                 if (colon == std::string_view::npos) bad(l, "env.waypoints", "expected t:x,y entries");
                 path.waypoints.push_back({to_double(trim(part.substr(0, colon)), l, "env.waypoints"),
                                           to_vec2(trim(part.substr(colon + 1)), l, "env.waypoints")});
             }
             c.env.demand_path = path;
         },
         [](const RunConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.env.demand_path.waypoints.size(); ++i) {
                 const auto& w = c.env.demand_path.waypoints[i];
                 s += (i ? "; " : "") + fmt(w.t) + ":" + fmt(w.at);
             }
             return s;
         }},
        NUM_ENTRY("env.demand_spread", env.demand_spread),
        NUM_ENTRY("env.demand_scale", env.demand_scale),
        VEC2_ENTRY("env.lqr_target", env.lqr.target),
        {"env.lqr_q",
         [](RunConfig& c, std::string_view v, int l) {
             const auto q = to_doubles(v, l, "env.lqr_q");
             if (q.size() != 4) bad(l, "env.lqr_q", "expected q11,q12,q21,q22");
             c.env.lqr.q << q[0], q[1], q[2], q[3];
         },
         [](const RunConfig& c) {
             const auto& q = c.env.lqr.q;
             return fmt_list({q(0, 0), q(0, 1), q(1, 0), q(1, 1)});
         }},

        NUM_ENTRY("learner.actor_lr", learner.actor_lr),
        NUM_ENTRY("learner.critic_lr", learner.critic_lr),
        NUM_ENTRY("learner.policy_std", learner.policy_std),
        INT_ENTRY("learner.hidden", learner.hidden),
        {"learner.grid_bins",
         [](RunConfig& c, std::string_view v, int l) {
             const auto parts = split(v, ',');
             if (parts.size() != 2) bad(l, "learner.grid_bins", "expected nx,ny");
             c.learner.grid.x_bins = to_int(parts[0], l, "learner.grid_bins");
             c.learner.grid.y_bins = to_int(parts[1], l, "learner.grid_bins");
         },
         [](const RunConfig& c) {
             return std::to_string(c.learner.grid.x_bins) + "," + std::to_string(c.learner.grid.y_bins);
         }},
        {"learner.grid_bounds",
         [](RunConfig& c, std::string_view v, int l) {
             const auto b = to_doubles(v, l, "learner.grid_bounds");
             if (b.size() != 4) bad(l, "learner.grid_bounds", "expected x_min,x_max,y_min,y_max");
             c.learner.grid.bounds = {b[0], b[1], b[2], b[3]};
         },
         [](const RunConfig& c) {
             const auto& b = c.learner.grid.bounds;
             return fmt_list({b.x_min, b.x_max, b.y_min, b.y_max});
         }},
        {"learner.belief",
         [](RunConfig& c, std::string_view v, int l) {
             if (v == "averaged") c.learner.belief = BeliefMode::averaged;
             else if (v == "instantaneous") c.learner.belief = BeliefMode::instantaneous;
             else bad(l, "learner.belief", "expected averaged or instantaneous");
         },
         [](const RunConfig& c) {
             return std::string(c.learner.belief == BeliefMode::averaged ? "averaged" : "instantaneous");
         }},
        {"learner.schedule",
         [](RunConfig& c, std::string_view v, int l) {
             if (v == "fixed") c.learner.schedule = ScheduleMode::fixed;
             else if (v == "theory") c.learner.schedule = ScheduleMode::theory;
             else bad(l, "learner.schedule", "expected fixed or theory");
         },
         [](const RunConfig& c) {
             return std::string(c.learner.schedule == ScheduleMode::fixed ? "fixed" : "theory");
         }},
        {"learner.theory_actor",
         [](RunConfig& c, std::string_view v, int l) {
             const auto p = to_vec2(v, l, "learner.theory_actor");
             c.learner.theory_actor = {p.x(), p.y()};
         },
         [](const RunConfig& c) {
             return fmt(Vec2(c.learner.theory_actor.scale, c.learner.theory_actor.exponent));
         }},
        {"learner.theory_belief",
         [](RunConfig& c, std::string_view v, int l) {
             const auto p = to_vec2(v, l, "learner.theory_belief");
             c.learner.theory_belief = {p.x(), p.y()};
         },
         [](const RunConfig& c) {
             return fmt(Vec2(c.learner.theory_belief.scale, c.learner.theory_belief.exponent));
         }},
        BOOL_ENTRY("learner.critic_density", learner.critic_density),
        BOOL_ENTRY("learner.actor_time", learner.actor_time),
        BOOL_ENTRY("learner.critic_zero_output", learner.critic_zero_output),
        NUM_ENTRY("learner.gae_lambda", learner.gae_lambda),
        NUM_ENTRY("learner.divergence_limit", learner.divergence_limit),

        {"sweep.alphas",
         [](RunConfig& c, std::string_view v, int l) { c.alphas = to_doubles(v, l, "sweep.alphas"); },
         [](const RunConfig& c) { return fmt_list(c.alphas); }},
        {"sweep.init_means",
         [](RunConfig& c, std::string_view v, int l) { c.init_means = to_vec2s(v, l, "sweep.init_means"); },
         [](const RunConfig& c) { return fmt_list(c.init_means); }},

        INT_ENTRY("oracle.states", oracle.states),
        INT_ENTRY("oracle.horizon", oracle.horizon),
        INT_ENTRY("oracle.target", oracle.target),
        NUM_ENTRY("oracle.base", oracle.base),
        NUM_ENTRY("oracle.move_cost", oracle.move_cost),
        INT_ENTRY("oracle.iterations", oracle.iterations),
        {"oracle.sizes",
         [](RunConfig& c, std::string_view v, int l) {
             c.oracle.sizes.clear();
             for (auto part : split(v, ',')) c.oracle.sizes.push_back(to_int(part, l, "oracle.sizes"));
         },
         [](const RunConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.oracle.sizes.size(); ++i) {
                 s += (i ? "," : "") + std::to_string(c.oracle.sizes[i]);
             }
             return s;
         }},
        INT_ENTRY("oracle.trials", oracle.trials),
        INT_ENTRY("oracle.potential_agents", oracle.potential_agents),
        INT_ENTRY("oracle.potential_states", oracle.potential_states),
        INT_ENTRY("oracle.potential_actions", oracle.potential_actions),
        INT_ENTRY("oracle.potential_horizon", oracle.potential_horizon),
        INT_ENTRY("oracle.deviations", oracle.deviations),
        NUM_ENTRY("oracle.crowding", oracle.crowding),
    };
    return entries;
}

#undef NUM_ENTRY
#undef INT_ENTRY
#undef BOOL_ENTRY
#undef VEC2_ENTRY

}  // namespace

std::string_view to_string(Experiment e) {
    switch (e) {
        case Experiment::congestion: return "congestion";
        case Experiment::congestion_bimodal: return "congestion-bimodal";
        case Experiment::demand: return "demand";
        case Experiment::lqr: return "lqr";
        case Experiment::oracle_fp: return "oracle-fp";
        case Experiment::oracle_scaling: return "oracle-scaling";
        case Experiment::oracle_potential: return "oracle-potential";
    }
    return "unknown";
}

Experiment parse_experiment(std::string_view name) {
    for (auto e : {Experiment::congestion, Experiment::congestion_bimodal, Experiment::demand,
                   Experiment::lqr, Experiment::oracle_fp, Experiment::oracle_scaling,
                   Experiment::oracle_potential}) {
        if (to_string(e) == name) return e;
    }
    throw ConfigError(0, "unknown experiment '" + std::string(name) + "'");
}

RunConfig default_config(Experiment e) {
    RunConfig c;
    c.experiment = e;
    switch (e) {
        case Experiment::congestion:
        case Experiment::congestion_bimodal:
            c.env = default_env(e == Experiment::congestion ? EnvKind::congestion
                                                            : EnvKind::congestion_bimodal);
            c.learner.agents = 1000;
            c.learner.episodes = 2000;
            c.learner.actor_lr = c.learner.critic_lr = 1e-4;
            c.repeats = 6;
            c.eval_agents = 1000;
            if (e == Experiment::congestion) c.alphas = {1.0, 1.5, 2.0, 2.5, 3.0};
            else c.alphas = {1.0};
            break;
        case Experiment::demand:
            c.env = default_env(EnvKind::demand);
            c.learner.agents = 200;
            c.learner.episodes = 2000;
            c.learner.actor_lr = c.learner.critic_lr = 1e-3;
            c.learner.actor_time = true;
            c.learner.gae_lambda = 0.9;
            c.repeats = 6;
            c.init_means = {Vec2(-0.20, 0.00), Vec2(-0.20, 0.30), Vec2(-0.39, 0.16),
                            Vec2(-0.60, 0.00), Vec2(-0.60, 0.30)};
            break;
        case Experiment::lqr:
            c.env = default_env(EnvKind::lqr);
            c.learner.agents = 200;
            c.learner.episodes = 2000;
            c.learner.actor_lr = c.learner.critic_lr = 1e-3;
            c.learner.gae_lambda = 0.9;
            c.repeats = 1;
            break;
        case Experiment::oracle_fp:
        case Experiment::oracle_scaling:
        case Experiment::oracle_potential:
            c.env = default_env(EnvKind::congestion);
            c.repeats = 1;
            break;
    }
    return c;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value, int line) {
    key = trim(key);
    value = trim(value);
    if (key == "experiment") {
        if (parse_experiment(value) != config.experiment) {
            throw ConfigError(line, "experiment cannot be changed by an override");
        }
        return;
    }
    for (const auto& e : registry()) {
        if (key == e.key) {
            e.set(config, value, line);
            return;
        }
    }
    throw ConfigError(line, "unknown key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text) {
    struct Line {
        int number;
        std::string_view key;
        std::string_view value;
    };
    std::vector<Line> lines;
    std::set<std::string_view> seen;
    int number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        std::string_view raw = text.substr(start, end == std::string_view::npos ? text.size() - start : end - start);
        ++number;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        raw = trim(raw);
        if (!raw.empty()) {
            const auto eq = raw.find('=');
            if (eq == std::string_view::npos) throw ConfigError(number, "expected key = value");
            const auto key = trim(raw.substr(0, eq));
            if (key.empty()) throw ConfigError(number, "missing key");
            if (!seen.insert(key).second) throw ConfigError(number, "duplicate key '" + std::string(key) + "'");
            lines.push_back({number, key, trim(raw.substr(eq + 1))});
        }
        if (end == std::string_view::npos) break;
        start = end + 1;
    }

    const Line* exp = nullptr;
    for (const auto& l : lines) {
        if (l.key == "experiment") exp = &l;
    }
    if (!exp) throw ConfigError(0, "missing experiment name");
    Experiment which;
    try {
        which = parse_experiment(exp->value);
    } catch (const ConfigError& e) {
        throw ConfigError(exp->number, e.what());
    }

    RunConfig config = default_config(which);
    for (const auto& l : lines) apply_setting(config, l.key, l.value, l.number);
    config.validate();
    return config;
}

void RunConfig::validate() const {
    try {
        env.validate();
        learner.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(0, e.what());
    }
    if (repeats < 1) throw ConfigError(0, "repeats must be ≥ 1");
    if (eval_agents < 1) throw ConfigError(0, "eval_agents must be ≥ 1");
    if (window < 1) throw ConfigError(0, "window must be ≥ 1");
    if (burn_in < 0) throw ConfigError(0, "burn_in must be ≥ 0");
    if (experiment == Experiment::lqr && burn_in > env.horizon) throw ConfigError(0, "burn_in must lie in 0..horizon");
    if (snapshot_every < 0) throw ConfigError(0, "snapshot_every must be ≥ 0");
    if (out.empty()) throw ConfigError(0, "out must not be empty");
    for (double a : alphas) {
        if (!(a > 0.0)) throw ConfigError(0, "sweep alphas must be > 0");
    }
    const auto& o = oracle;
    if (o.states < 2 || o.horizon < 1 || o.target < 0 || o.target >= o.states) {
        throw ConfigError(0, "invalid oracle ring game");
    }
    if (!(o.base > 0.0)) throw ConfigError(0, "oracle.base must be > 0");
    if (o.iterations < 1 || o.trials < 1 || o.deviations < 0) throw ConfigError(0, "invalid oracle counts");
    if (o.sizes.empty()) throw ConfigError(0, "oracle.sizes must not be empty");
    for (int n : o.sizes) {
        if (n < 1) throw ConfigError(0, "oracle.sizes entries must be ≥ 1");
    }
    if (o.potential_agents < 1 || o.potential_states < 1 || o.potential_actions < 1 ||
        o.potential_horizon < 1) {
        throw ConfigError(0, "invalid potential-game shape");
    }
}

std::string serialize_config(const RunConfig& config) {
    std::ostringstream out;
    out << "experiment = " << to_string(config.experiment) << "\n";
    for (const auto& e : registry()) out << e.key << " = " << e.get(config) << "\n";
    return out.str();
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys{"experiment"};
    for (const auto& e : registry()) keys.emplace_back(e.key);
    return keys;
}

}  // namespace mfrl
