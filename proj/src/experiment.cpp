#include "mfrl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mfrl/discrete_mfg.hpp"
#include "mfrl/error.hpp"
#include "mfrl/lqr.hpp"
#include "mfrl/metrics.hpp"
#include "mfrl/nplayer.hpp"

namespace mfrl {

namespace fs = std::filesystem;

void Summary::set(std::string_view key, double value) { set(key, format_number(value)); }

void Summary::set(std::string_view key, std::string_view value) {
    if (key.empty() || key.find_first_of(" \t\n") != std::string_view::npos) {
        throw Error("bad summary key '" + std::string(key) + "'");
    }
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

std::optional<std::string> Summary::text(std::string_view key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    return std::nullopt;
}

std::optional<double> Summary::number(std::string_view key) const {
    const auto v = text(key);
    if (!v) return std::nullopt;
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), x);
    if (ec != std::errc() || ptr != v->data() + v->size()) return std::nullopt;
    return x;
}

void Summary::write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << ' ' << v << '\n';
}

Summary Summary::read(std::istream& in) {
    Summary s;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto space = line.find(' ');
        if (space == std::string::npos) throw Error("malformed summary line '" + line + "'");
        s.set(line.substr(0, space), line.substr(space + 1));
    }
    return s;
}

std::string format_number(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string run_tag(int group, int repeat) {
    return "g" + std::to_string(group) + "_r" + std::to_string(repeat);
}

int sweep_size(const RunConfig& config) {
    switch (config.experiment) {
        case Experiment::congestion:
        case Experiment::congestion_bimodal:
            return config.alphas.empty() ? 1 : static_cast<int>(config.alphas.size());
        case Experiment::demand:
            return config.init_means.empty() ? 1 : static_cast<int>(config.init_means.size());
        case Experiment::lqr: return 1;
        default: return 0;
    }
}

std::uint64_t run_seed(const RunConfig& config, int group, int repeat) {
    return mix_seed(config.learner.seed, static_cast<std::uint64_t>(group),
                    static_cast<std::uint64_t>(repeat));
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("missing artifact " + path.string());
    return in;
}

void write_positions(const fs::path& path, const Eigen::Matrix2Xd& xs) {
    auto out = open_out(path);
    out << "x,y\n";
    for (Eigen::Index j = 0; j < xs.cols(); ++j) {
        out << format_number(xs(0, j)) << ',' << format_number(xs(1, j)) << '\n';
    }
}

void write_grid(const fs::path& path, const DensityGrid& grid) {
    auto out = open_out(path);
    write_grid_csv(out, grid);
}

void write_trace_row(std::ostream& out, const TraceRow& r) {
    out << r.episode << ',' << format_number(r.mean_return) << ',' << format_number(r.belief_drift)
        << ',' << format_number(r.actor_grad_norm) << ',' << format_number(r.critic_loss) << '\n';
}

constexpr const char* kTraceHeader = "episode,mean_return,belief_drift,actor_grad_norm,critic_loss\n";

struct RunOutput {
    TrainResult result;
    Eigen::Matrix2Xd last_terminal;
};

// Trains one run, streaming the trace and snapshots so a divergence still
// leaves everything up to the failing episode on disk.
RunOutput train_run(const fs::path& dir, const std::string& tag, const EnvSpec& spec,
                    const LearnerConfig& learner, int snapshot_every) {
    auto trace = open_out(dir / ("trace_" + tag + ".csv"));
    trace << kTraceHeader;
    RunOutput out;
    out.result = train(spec, learner, [&](const TrainState& state, const EpisodeLog& log,
                                          const TraceRow& row) {
        write_trace_row(trace, row);
        out.last_terminal = log.terminal();
        const long done = row.episode + 1;
        if (snapshot_every > 0 && done % snapshot_every == 0) {
            const std::string suffix = tag + "_e" + std::to_string(done) + ".csv";
            write_grid(dir / ("belief_" + suffix), state.beliefs.back().average);
            write_positions(dir / ("terminal_" + suffix), log.terminal());
        }
    });
    trace.flush();
    if (!trace) throw Error("cannot write trace for " + tag);

    const auto& state = out.result.state;
    write_grid(dir / ("belief_" + tag + ".csv"), state.beliefs.back().average);
    if (out.last_terminal.cols() > 0) write_positions(dir / ("terminal_" + tag + ".csv"), out.last_terminal);
    auto ckpt = open_out(dir / ("checkpoint_" + tag + ".csv"));
    write_parameters_csv(ckpt, "actor", state.actor.mean);
    write_parameters_csv(ckpt, "critic", state.critic);
    return out;
}

// Mean of the per-run traces of one sweep entry, over the common length.
void write_mean_trace(const fs::path& path, const std::vector<std::vector<TraceRow>>& traces) {
    if (traces.empty()) return;
    std::size_t length = traces.front().size();
    for (const auto& t : traces) length = std::min(length, t.size());
    auto out = open_out(path);
    out << kTraceHeader;
    const double n = static_cast<double>(traces.size());
    for (std::size_t i = 0; i < length; ++i) {
        TraceRow mean;
        mean.episode = traces.front()[i].episode;
        for (const auto& t : traces) {
            mean.mean_return += t[i].mean_return / n;
            mean.belief_drift += t[i].belief_drift / n;
            mean.actor_grad_norm += t[i].actor_grad_norm / n;
            mean.critic_loss += t[i].critic_loss / n;
        }
        write_trace_row(out, mean);
    }
}

std::vector<AgentSeed> eval_agents(const RunConfig& config, const EnvSpec& spec,
                                   std::uint64_t seed) {
    SplitMix64 rng(mix_seed(seed, 0xe7a1));
    return draw_agents(spec, config.eval_agents, rng);
}

struct Diverged {
    std::string tag;
    std::string what;
};

void run_congestion(const RunConfig& config, const fs::path& dir, Summary& summary) {
    const bool bimodal = config.experiment == Experiment::congestion_bimodal;
    std::vector<Vec2> peaks;
    for (const auto& c : config.env.congestion.components) peaks.push_back(c.mean);

    const int groups = sweep_size(config);
    std::vector<double> belief_dispersion(groups, 0.0);
    double basin_min = 1.0;
    double stabilization_max = 0.0;
    for (int g = 0; g < groups; ++g) {
        EnvSpec spec = config.env;
        if (!config.alphas.empty()) spec.alpha = config.alphas[g];
        std::vector<std::vector<TraceRow>> traces;
        double terminal_dispersion = 0.0;
        for (int r = 0; r < config.repeats; ++r) {
            const std::string tag = run_tag(g, r);
            LearnerConfig learner = config.learner;
            learner.seed = run_seed(config, g, r);
            auto run = train_run(dir, tag, spec, learner, config.snapshot_every);
            if (run.result.diverged) throw Diverged{tag, run.result.error};
            const auto& state = run.result.state;

            const auto agents = eval_agents(config, spec, learner.seed);
            const auto log = rollout(spec, state, agents);
            write_positions(dir / ("eval_terminal_" + tag + ".csv"), log.terminal());

            const auto conv = convergence_metrics(run.result.trace, log.terminal(), config.window);
            const DensityGrid& belief = state.beliefs.back().average;
            const double bd = mean_pairwise_distance(belief);
            const std::string key = "run." + tag + ".";
            summary.set(key + "alpha", spec.alpha);
            summary.set(key + "final_return", conv.window_mean);
            summary.set(key + "window_std", conv.window_std);
            summary.set(key + "return_range", conv.return_range);
            summary.set(key + "stabilization", conv.stabilization);
            summary.set(key + "belief_dispersion", bd);
            summary.set(key + "terminal_dispersion", conv.dispersion);
            if (bimodal) {
                const auto belief_share = basin_shares(belief, peaks);
                const auto point_share = basin_shares(log.terminal(), peaks);
                for (std::size_t p = 0; p < peaks.size(); ++p) {
                    summary.set(key + "belief_basin_share." + std::to_string(p), belief_share[p]);
                    summary.set(key + "terminal_basin_share." + std::to_string(p), point_share[p]);
                    basin_min = std::min(basin_min, belief_share[p]);
                }
            }
            belief_dispersion[g] += bd / config.repeats;
            terminal_dispersion += conv.dispersion / config.repeats;
            stabilization_max = std::max(stabilization_max, conv.stabilization);
            traces.push_back(std::move(run.result.trace));
        }
        write_mean_trace(dir / ("trace_mean_g" + std::to_string(g) + ".csv"), traces);
        const std::string key = "group.g" + std::to_string(g) + ".";
        summary.set(key + "alpha", spec.alpha);
        summary.set(key + "belief_dispersion", belief_dispersion[g]);
        summary.set(key + "terminal_dispersion", terminal_dispersion);
    }
    summary.set("stabilization_max", stabilization_max);
    bool increasing = groups > 1;
    for (int g = 1; g < groups; ++g) increasing = increasing && belief_dispersion[g] > belief_dispersion[g - 1];
    summary.set("dispersion_increasing", increasing ? 1.0 : 0.0);
    if (bimodal) summary.set("basin_share_min", basin_min);
}

void run_demand(const RunConfig& config, const fs::path& dir, Summary& summary) {
    const int groups = sweep_size(config);
    const int T = config.env.horizon;
    double max_distance = 0.0;
    bool beats = true;
    bool sign_pattern = true;
    for (int g = 0; g < groups; ++g) {
        EnvSpec spec = config.env;
        if (!config.init_means.empty()) spec.init_mean = config.init_means[g];
        std::vector<std::vector<TraceRow>> traces;
        for (int r = 0; r < config.repeats; ++r) {
            const std::string tag = run_tag(g, r);
            LearnerConfig learner = config.learner;
            learner.seed = run_seed(config, g, r);
            auto run = train_run(dir, tag, spec, learner, config.snapshot_every);
            if (run.result.diverged) throw Diverged{tag, run.result.error};

            // Deterministic evaluation priced against the episode's own measure,
            // next to a controller that jumps onto the demand path every step.
            const auto agents = eval_agents(config, spec, learner.seed);
            RolloutOptions options;
            options.deterministic = true;
            options.coupling = BeliefMode::instantaneous;
            const auto learned = rollout(spec, run.result.state, agents, options);
            const auto tracer = simulate(
                spec, learner.grid,
                [&spec](const Eigen::Matrix2Xd& xs, int k) {
                    const Vec2 target = spec.demand_path.at(k + 1);
                    Eigen::Matrix2Xd u(2, xs.cols());
                    for (Eigen::Index j = 0; j < xs.cols(); ++j) u.col(j) = (target - spec.a * xs.col(j)) / spec.b;
                    return u;
                },
                agents);

            auto paths = open_out(dir / ("path_" + tag + ".csv"));
            paths << "k,mean_x,mean_y,path_x,path_y,distance\n";
            double distance = 0.0;
            for (int k = 0; k <= T; ++k) {
                const Vec2 m = learned.states[k].rowwise().mean();
                const Vec2 p = spec.demand_path.at(k);
                const double d = (m - p).norm();
                if (k >= 1) distance = std::max(distance, d);
                paths << k << ',' << format_number(m.x()) << ',' << format_number(m.y()) << ','
                      << format_number(p.x()) << ',' << format_number(p.y()) << ','
                      << format_number(d) << '\n';
            }

            const int shown = std::min(learned.agents, 20);
            auto polylines = open_out(dir / ("agent_paths_" + tag + ".csv"));
            polylines << "agent,k,x,y\n";
            for (int j = 0; j < shown; ++j) {
                for (int k = 0; k <= T; ++k) {
                    polylines << j << ',' << k << ',' << format_number(learned.states[k](0, j)) << ','
                              << format_number(learned.states[k](1, j)) << '\n';
                }
            }

            const auto series = learned.step_mean_rewards();
            const auto baseline = tracer.step_mean_rewards();
            auto rewards = open_out(dir / ("step_rewards_" + tag + ".csv"));
            rewards << "k,learned,tracer\n";
            for (int k = 0; k < T; ++k) {
                rewards << k << ',' << format_number(series[k]) << ',' << format_number(baseline[k]) << '\n';
            }
            double late = 0.0;
            for (int k = T / 2; k < T; ++k) late += series[k];
            late /= static_cast<double>(T - T / 2);

            const std::string key = "run." + tag + ".";
            summary.set(key + "init_mean_x", spec.init_mean.x());
            summary.set(key + "init_mean_y", spec.init_mean.y());
            summary.set(key + "max_path_distance", distance);
            summary.set(key + "learned_return", learned.mean_return);
            summary.set(key + "tracer_return", tracer.mean_return);
            summary.set(key + "first_reward", series.front());
            summary.set(key + "late_reward_mean", late);
            max_distance = std::max(max_distance, distance);
            beats = beats && learned.mean_return > tracer.mean_return;
            sign_pattern = sign_pattern && series.front() < 0.0 && late > 0.0;
            traces.push_back(std::move(run.result.trace));
        }
        write_mean_trace(dir / ("trace_mean_g" + std::to_string(g) + ".csv"), traces);
    }
    summary.set("max_path_distance", max_distance);
    summary.set("learned_beats_tracer", beats ? 1.0 : 0.0);
    summary.set("negative_then_positive", sign_pattern ? 1.0 : 0.0);
}

void run_lqr(const RunConfig& config, const fs::path& dir, Summary& summary) {
    const EnvSpec& spec = config.env;
    const auto analytic = lqr_analytic(spec);
    Vec2 mean = Vec2::Zero();
    Vec2 variance = Vec2::Zero();
    double gain = 0.0;
    std::vector<std::vector<TraceRow>> traces;
    for (int r = 0; r < config.repeats; ++r) {
        const std::string tag = run_tag(0, r);
        LearnerConfig learner = config.learner;
        learner.seed = run_seed(config, 0, r);
        auto run = train_run(dir, tag, spec, learner, config.snapshot_every);
        if (run.result.diverged) throw Diverged{tag, run.result.error};

        const auto agents = eval_agents(config, spec, learner.seed);
        RolloutOptions options;
        options.deterministic = true;
        const auto log = rollout(spec, run.result.state, agents, options);
        const auto stats = stationary_statistics(log, config.burn_in);

        // Least-squares scalar gain of u = -k (x - target) over the pooled steps.
        double num = 0.0, den = 0.0;
        for (int k = config.burn_in; k < spec.horizon; ++k) {
            const Eigen::Matrix2Xd e = log.states[k].colwise() - spec.lqr.target;
            num -= (log.actions[k].array() * e.array()).sum();
            den += e.squaredNorm();
        }
        const double fitted = den > 0.0 ? num / den : 0.0;

        auto out = open_out(dir / ("lqr_eval_" + tag + ".csv"));
        out << "k,mean_x,mean_y,var_x,var_y\n";
        for (int k = 0; k <= spec.horizon; ++k) {
            const Vec2 m = log.states[k].rowwise().mean();
            const Vec2 v = (log.states[k].colwise() - m).rowwise().squaredNorm() / static_cast<double>(log.agents);
            out << k << ',' << format_number(m.x()) << ',' << format_number(m.y()) << ','
                << format_number(v.x()) << ',' << format_number(v.y()) << '\n';
        }

        const std::string key = "run." + tag + ".";
        summary.set(key + "learned_mean_x", stats.mean.x());
        summary.set(key + "learned_mean_y", stats.mean.y());
        summary.set(key + "learned_variance_x", stats.variance.x());
        summary.set(key + "learned_variance_y", stats.variance.y());
        summary.set(key + "learned_gain", fitted);
        mean += stats.mean / config.repeats;
        variance += stats.variance / config.repeats;
        gain += fitted / config.repeats;
        traces.push_back(std::move(run.result.trace));
    }
    write_mean_trace(dir / "trace_mean_g0.csv", traces);
    summary.set("learned_mean_x", mean.x());
    summary.set("learned_mean_y", mean.y());
    summary.set("learned_variance_x", variance.x());
    summary.set("learned_variance_y", variance.y());
    summary.set("learned_gain", gain);
    summary.set("analytic_mean_x", analytic.mean.x());
    summary.set("analytic_mean_y", analytic.mean.y());
    summary.set("analytic_variance_x", analytic.variance.x());
    summary.set("analytic_variance_y", analytic.variance.y());
    summary.set("analytic_gain", analytic.gain(0, 0));
    summary.set("riccati_iterations", analytic.iterations);
}

DiscreteMFG ring_game(const OracleConfig& o) {
    return monotone_ring_game(o.states, o.horizon, o.target, o.base, o.move_cost);
}

void run_oracle_fp(const RunConfig& config, const fs::path& dir, Summary& summary) {
    const auto game = ring_game(config.oracle);
    const auto fp = fictitious_play(game, config.oracle.iterations);
    auto out = open_out(dir / "exploitability.csv");
    out << "iteration,exploitability\n";
    double running = std::numeric_limits<double>::infinity();
    int first_below = -1;
    bool nonincreasing = true;
    double previous = running;
    for (std::size_t i = 0; i < fp.exploitability.size(); ++i) {
        const double e = fp.exploitability[i];
        out << i + 1 << ',' << format_number(e) << '\n';
        running = std::min(running, e);
        nonincreasing = nonincreasing && running <= previous;
        previous = running;
        if (first_below < 0 && running < 1e-3) first_below = static_cast<int>(i + 1);
    }
    auto flow = open_out(dir / "fp_flow.csv");
    flow << "t";
    for (int s = 0; s < game.states; ++s) flow << ",s" << s;
    flow << '\n';
    for (std::size_t t = 0; t < fp.flow.size(); ++t) {
        flow << t;
        for (int s = 0; s < game.states; ++s) flow << ',' << format_number(fp.flow[t](s));
        flow << '\n';
    }
    summary.set("iterations", config.oracle.iterations);
    summary.set("final_exploitability", fp.exploitability.back());
    summary.set("min_exploitability", running);
    summary.set("first_below_1e-3", first_below);
    summary.set("running_min_nonincreasing", nonincreasing ? 1.0 : 0.0);
}

void run_oracle_scaling(const RunConfig& config, const fs::path& dir, Summary& summary) {
    const auto game = ring_game(config.oracle);
    const auto fp = fictitious_play(game, config.oracle.iterations);
    const auto rows = scaling_experiment(game, fp.policy, config.oracle.sizes, config.oracle.trials,
                                         mix_seed(config.learner.seed, 0x5ca1));
    auto out = open_out(dir / "scaling.csv");
    out << "N,trials,gap_mean,gap_std\n";
    for (const auto& r : rows) {
        out << r.agents << ',' << r.trials << ',' << format_number(r.gap_mean) << ','
            << format_number(r.gap_std) << '\n';
    }
    summary.set("policy_exploitability", fp.exploitability.back());
    summary.set("slope", loglog_slope(rows));
    summary.set("gap_smallest_n", rows.front().gap_mean);
    summary.set("gap_largest_n", rows.back().gap_mean);
}

void run_oracle_potential(const RunConfig& config, Summary& summary) {
    const auto& o = config.oracle;
    SplitMix64 rng(mix_seed(config.learner.seed, 0x907e));
    const auto game = random_game(o.potential_states, o.potential_actions, o.potential_horizon,
                                  o.crowding, rng);
    const auto check = potential_identity_check(game, o.potential_agents, o.deviations, rng);
    summary.set("agents", o.potential_agents);
    summary.set("deviations", check.deviations);
    summary.set("max_discrepancy", check.max_discrepancy);
}

void write_summary(const fs::path& dir, const Summary& summary) {
    auto out = open_out(dir / "summary");
    summary.write(out);
    out.flush();
    if (!out) throw Error("cannot write summary");
}

}  // namespace

RunResult run_experiment(const RunConfig& config) {
    RunResult result;
    try {
        config.validate();
    } catch (const ConfigError& e) {
        result.exit_code = 2;
        result.message = e.what();
        return result;
    }

    const fs::path dir(config.out);
    Summary& summary = result.summary;
    summary.set("experiment", to_string(config.experiment));
    summary.set("seed", std::to_string(config.learner.seed));
    try {
        fs::create_directories(dir);
        {
            auto cfg = open_out(dir / "config.txt");
            cfg << serialize_config(config);
        }
        switch (config.experiment) {
            case Experiment::congestion:
            case Experiment::congestion_bimodal: run_congestion(config, dir, summary); break;
            case Experiment::demand: run_demand(config, dir, summary); break;
            case Experiment::lqr: run_lqr(config, dir, summary); break;
            case Experiment::oracle_fp: run_oracle_fp(config, dir, summary); break;
            case Experiment::oracle_scaling: run_oracle_scaling(config, dir, summary); break;
            case Experiment::oracle_potential: run_oracle_potential(config, summary); break;
        }
        summary.set("status", "ok");
    } catch (const Diverged& d) {
        result.exit_code = 3;
        result.message = "run " + d.tag + " diverged: " + d.what;
        summary.set("status", "diverged");
        summary.set("diverged_run", d.tag);
    } catch (const std::exception& e) {
        result.exit_code = 1;
        result.message = e.what();
        summary.set("status", "failed");
    }
    try {
        write_summary(dir, summary);
    } catch (const std::exception& e) {
        if (result.exit_code == 0) {
            result.exit_code = 1;
            result.message = e.what();
        }
    }
    return result;
}

namespace {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<int>(i);
        }
        throw Error("missing column " + std::string(name));
    }
};

Table read_table(const fs::path& path) {
    auto in = open_in(path);
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw Error("empty artifact " + path.string());
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) {
            double x = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
            if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                throw Error("malformed value in " + path.string());
            }
            row.push_back(x);
        }
        if (row.size() != t.header.size()) throw Error("ragged row in " + path.string());
        t.rows.push_back(std::move(row));
    }
    return t;
}

class PlotWriter {
public:
    explicit PlotWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    // Selected columns of a table, space separated, one row per line.
    void columns(const std::string& name, const Table& t, const std::vector<std::string>& cols) {
        std::vector<int> idx;
        for (const auto& c : cols) idx.push_back(t.column(c));
        auto out = begin(name, cols);
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < idx.size(); ++i) out << (i ? " " : "") << format_number(row[idx[i]]);
            out << '\n';
        }
    }

    std::ofstream begin(const std::string& name, const std::vector<std::string>& cols) {
        const fs::path path = dir_ / name;
        written_.push_back(path.string());
        auto out = open_out(path);
        out << '#';
        for (const auto& c : cols) out << ' ' << c;
        out << '\n';
        return out;
    }

    std::vector<std::string> done() {
        std::sort(written_.begin(), written_.end());
        return written_;
    }

private:
    fs::path dir_;
    std::vector<std::string> written_;
};

}  // namespace

std::vector<std::string> emit_plotdata(const std::string& dir_name) {
    const fs::path dir(dir_name);
    RunConfig config;
    {
        auto in = open_in(dir / "config.txt");
        std::stringstream text;
        text << in.rdbuf();
        config = parse_config(text.str());
    }
    {
        auto in = open_in(dir / "summary");
        const auto summary = Summary::read(in);
        if (summary.text("status") != "ok") throw Error("run in " + dir.string() + " did not complete");
    }

    PlotWriter plot(dir / "plot");
    const int groups = sweep_size(config);
    for (int g = 0; g < groups; ++g) {
        const std::string gs = "g" + std::to_string(g);
        plot.columns("reward_mean_" + gs + ".dat", read_table(dir / ("trace_mean_" + gs + ".csv")),
                     {"episode", "mean_return"});
        for (int r = 0; r < config.repeats; ++r) {
            const std::string tag = run_tag(g, r);
            plot.columns("reward_" + tag + ".dat", read_table(dir / ("trace_" + tag + ".csv")),
                         {"episode", "mean_return"});
        }
    }

    switch (config.experiment) {
        case Experiment::congestion:
        case Experiment::congestion_bimodal:
            for (int g = 0; g < groups; ++g) {
                const double alpha = config.alphas.empty() ? config.env.alpha : config.alphas[g];
                auto out = plot.begin("scatter_alpha_" + format_number(alpha) + ".dat", {"x", "y"});
                for (int r = 0; r < config.repeats; ++r) {
                    const auto t = read_table(dir / ("eval_terminal_" + run_tag(g, r) + ".csv"));
                    for (const auto& row : t.rows) out << format_number(row[0]) << ' ' << format_number(row[1]) << '\n';
                }
            }
            break;
        case Experiment::demand: {
            auto overlay = plot.begin("demand_path.dat", {"k", "x", "y"});
            for (int k = 0; k <= config.env.horizon; ++k) {
                const Vec2 p = config.env.demand_path.at(k);
                overlay << k << ' ' << format_number(p.x()) << ' ' << format_number(p.y()) << '\n';
            }
            for (int g = 0; g < groups; ++g) {
                for (int r = 0; r < config.repeats; ++r) {
                    const std::string tag = run_tag(g, r);
                    plot.columns("path_" + tag + ".dat", read_table(dir / ("path_" + tag + ".csv")),
                                 {"k", "mean_x", "mean_y"});
                    plot.columns("step_reward_" + tag + ".dat",
                                 read_table(dir / ("step_rewards_" + tag + ".csv")),
                                 {"k", "learned", "tracer"});
                    const auto agents = read_table(dir / ("agent_paths_" + tag + ".csv"));
                    auto out = plot.begin("agent_paths_" + tag + ".dat", {"x", "y"});
                    // one polyline per agent, separated by blank lines
                    for (std::size_t i = 0; i < agents.rows.size(); ++i) {
                        if (i > 0 && agents.rows[i][0] != agents.rows[i - 1][0]) out << '\n';
                        out << format_number(agents.rows[i][2]) << ' ' << format_number(agents.rows[i][3]) << '\n';
                    }
                }
            }
            break;
        }
        case Experiment::lqr:
            for (int r = 0; r < config.repeats; ++r) {
                const std::string tag = run_tag(0, r);
                plot.columns("lqr_" + tag + ".dat", read_table(dir / ("lqr_eval_" + tag + ".csv")),
                             {"k", "mean_x", "mean_y", "var_x", "var_y"});
            }
            break;
        case Experiment::oracle_fp:
            plot.columns("exploitability.dat", read_table(dir / "exploitability.csv"),
                         {"iteration", "exploitability"});
            break;
        case Experiment::oracle_scaling:
            plot.columns("scaling.dat", read_table(dir / "scaling.csv"), {"N", "gap_mean", "gap_std"});
            break;
        case Experiment::oracle_potential: break;
    }
    return plot.done();
}

}  // namespace mfrl
