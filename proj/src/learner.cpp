#include "mfrl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mfrl/error.hpp"

namespace mfrl {

namespace {

bool canonical_less(const AgentSeed& a, const AgentSeed& b) {
    if (a.start.x() != b.start.x()) return a.start.x() < b.start.x();
    if (a.start.y() != b.start.y()) return a.start.y() < b.start.y();
    return a.stream < b.stream;
}

bool has_time_feature(int horizon) { return horizon > 1; }

const DensityGrid& coupling_grid(const TrainState& state, const EpisodeLog& log, int k,
                                 BeliefMode mode) {
    const auto& belief = state.beliefs.at(k);
    if (mode == BeliefMode::averaged && belief.count > 0) return belief.average;
    return log.measures.at(k);
}

Eigen::MatrixXd actor_inputs(const TrainState& state, const Eigen::Matrix2Xd& xs, int k) {
    const int dim = actor_input_dim(state.config, state.horizon);
    Eigen::MatrixXd in(dim, xs.cols());
    in.topRows<2>() = xs;
    if (dim > 2) in.row(2).setConstant(static_cast<double>(k) / state.horizon);
    return in;
}

Eigen::MatrixXd critic_inputs(const TrainState& state, const EpisodeLog& log,
                              const Eigen::Matrix2Xd& xs, int k) {
    const int dim = critic_input_dim(state.config, state.horizon);
    Eigen::MatrixXd in(dim, xs.cols());
    in.topRows<2>() = xs;
    int row = 2;
    if (has_time_feature(state.horizon)) {
        in.row(row++).setConstant(static_cast<double>(k) / state.horizon);
    }
    if (state.config.critic_density) {
        const auto& grid = coupling_grid(state, log, k, state.config.belief);
        for (Eigen::Index j = 0; j < xs.cols(); ++j) {
            in(row, j) = std::log1p(density_at(grid, xs.col(j)));
        }
    }
    return in;
}

void check_divergence(const TrainState& state) {
    const double limit = state.config.divergence_limit;
    if (state.actor.mean.max_abs_parameter() > limit || state.critic.max_abs_parameter() > limit) {
        throw DivergenceError("diverged");
    }
}

// Critic values for every (step, agent) pair: row k holds v(x_k), k = 0..T-1,
// and the TD targets use v(x_{k+1}) with v = 0 past the horizon.
struct CriticBatch {
    Mlp::Tape tape;            // inputs for k = 0..T-1, stacked step-major
    Eigen::RowVectorXd delta;  // TD errors in the same layout
};

CriticBatch critic_batch(const TrainState& state, const EnvSpec& spec, const EpisodeLog& log) {
    const int T = log.horizon;
    const int n = log.agents;
    const int dim = critic_input_dim(state.config, T);
    Eigen::MatrixXd inputs(dim, static_cast<Eigen::Index>(T + 1) * n);
    for (int k = 0; k <= T; ++k) {
        inputs.middleCols(static_cast<Eigen::Index>(k) * n, n) =
            critic_inputs(state, log, log.states[k], k);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(T) * n;
    CriticBatch batch;
    batch.tape = state.critic.forward_batch(inputs.leftCols(m));
    const Eigen::RowVectorXd next =
        T > 1 ? Eigen::RowVectorXd(state.critic.forward_batch(inputs.middleCols(n, m - n)).output)
              : Eigen::RowVectorXd();
    batch.delta.resize(m);
    for (int k = 0; k < T; ++k) {
        for (int j = 0; j < n; ++j) {
            const Eigen::Index idx = static_cast<Eigen::Index>(k) * n + j;
            const double bootstrap = (k + 1 < T) ? spec.gamma * next(idx) : 0.0;
            batch.delta(idx) = log.rewards[k](j) + bootstrap - batch.tape.output(0, idx);
        }
    }
    return batch;
}

}  // namespace

double PowerSchedule::operator()(long n) const {
    return scale * std::pow(static_cast<double>(n) + 1.0, -exponent);
}

long first_index_below(const PowerSchedule& schedule, double rate) {
    if (!(rate > 0.0)) return -1;
    if (schedule.exponent <= 0.0) return schedule(0) < rate ? 0 : -1;
    // scale * (n+1)^-p < rate  <=>  n + 1 > (scale / rate)^(1/p)
    const double threshold = std::pow(schedule.scale / rate, 1.0 / schedule.exponent);
    long n = std::max(0L, static_cast<long>(std::floor(threshold)) - 2);
    while (!(schedule(n) < rate)) ++n;
    return n;
}

void LearnerConfig::validate() const {
    if (agents < 1) throw Error("agents must be ≥ 1");
    if (episodes < 0) throw Error("episodes must be >= 0");
    if (hidden < 1) throw Error("hidden width must be >= 1");
    if (!(policy_std > 0.0)) throw Error("policy std must be > 0");
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw Error("learning rates must be > 0");
    if (!grid.valid()) throw Error("invalid grid");
    if (!(divergence_limit > 0.0)) throw Error("divergence limit must be > 0");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw Error("gae_lambda must lie in [0, 1]");
}

int actor_input_dim(const LearnerConfig& config, int horizon) {
    return 2 + ((config.actor_time && has_time_feature(horizon)) ? 1 : 0);
}

int critic_input_dim(const LearnerConfig& config, int horizon) {
    return 2 + (has_time_feature(horizon) ? 1 : 0) + (config.critic_density ? 1 : 0);
}

TrainState init_train_state(const EnvSpec& spec, const LearnerConfig& config) {
    spec.validate();
    config.validate();
    TrainState state;
    state.config = config;
    state.horizon = spec.horizon;
    SplitMix64 init_rng(mix_seed(config.seed, 0x1417));
    state.actor.mean =
        Mlp::glorot(actor_input_dim(config, spec.horizon), config.hidden, 2, init_rng);
    state.actor.std = config.policy_std;
    state.critic = Mlp::glorot(critic_input_dim(config, spec.horizon), config.hidden, 1, init_rng);
    if (config.critic_zero_output) state.critic.w2().setZero();
    state.actor_opt = AdamState(state.actor.mean.parameter_count(), config.actor_lr);
    state.critic_opt = AdamState(state.critic.parameter_count(), config.critic_lr);
    state.beliefs.assign(spec.horizon + 1, BeliefState(config.grid));
    return state;
}

std::vector<AgentSeed> draw_agents(const EnvSpec& spec, int count, SplitMix64& rng) {
    if (count < 1) throw Error("empty population");
    std::vector<AgentSeed> agents(count);
    for (auto& a : agents) {
        a.stream = rng();
        SplitMix64 start_rng(mix_seed(a.stream, 0x57a7));
        a.start = sample_initial(spec, start_rng);
    }
    return agents;
}

Eigen::RowVectorXd EpisodeLog::agent_returns() const {
    Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(agents);
    for (const auto& r : rewards) total += r;
    return total;
}

std::vector<double> EpisodeLog::step_mean_rewards() const {
    std::vector<double> out;
    out.reserve(rewards.size());
    for (const auto& r : rewards) out.push_back(r.mean());
    return out;
}

namespace {

// Shared episode core. `means` gives the action means at step k; `reward_grid`
// picks the measure that prices arrivals at time k (1..T).
template <class Means, class RewardGrid>
EpisodeLog run_episode(const EnvSpec& spec, const GridShape& grid, std::span<const AgentSeed> agents,
                       double action_std, double log_std, const Means& means,
                       const RewardGrid& reward_grid) {
    if (agents.empty()) throw Error("empty population");
    std::vector<AgentSeed> order(agents.begin(), agents.end());
    std::sort(order.begin(), order.end(), canonical_less);

    const int T = spec.horizon;
    const int n = static_cast<int>(order.size());

    EpisodeLog log;
    log.horizon = T;
    log.agents = n;
    log.states.assign(T + 1, Eigen::Matrix2Xd(2, n));
    log.actions.assign(T, Eigen::Matrix2Xd(2, n));
    log.rewards.assign(T, Eigen::RowVectorXd(n));
    log.log_probs.assign(T, Eigen::RowVectorXd(n));

    std::vector<SplitMix64> streams;
    std::vector<std::normal_distribution<double>> normals(n);
    streams.reserve(n);
    for (int j = 0; j < n; ++j) {
        log.states[0].col(j) = order[j].start;
        streams.emplace_back(order[j].stream);
    }

    for (int k = 0; k < T; ++k) {
        const Eigen::Matrix2Xd mu_k = means(log.states[k], k);
        for (int j = 0; j < n; ++j) {
            auto& g = streams[j];
            auto& normal = normals[j];
            const Vec2 z(normal(g), normal(g));
            const Vec2 eps(normal(g), normal(g));
            const Vec2 mu = mu_k.col(j);
            const Vec2 a = mu + action_std * z;
            log.actions[k].col(j) = a;
            log.log_probs[k](j) = gaussian_log_density(a, mu, log_std);
            const Vec2 next = step(spec, log.states[k].col(j), a, eps);
            if (!std::isfinite(next.x()) || !std::isfinite(next.y())) {
                throw DivergenceError("non-finite state/action");
            }
            log.states[k + 1].col(j) = next;
        }
    }

    log.measures.reserve(T + 1);
    for (int k = 0; k <= T; ++k) log.measures.push_back(build_empirical_measure(log.states[k], grid));

    for (int k = 0; k < T; ++k) {
        const DensityGrid& coupling = reward_grid(log, k + 1);
        for (int j = 0; j < n; ++j) {
            const Vec2 x = log.states[k + 1].col(j);
            log.rewards[k](j) =
                step_reward(spec, k + 1, x, log.actions[k].col(j), density_at(coupling, x));
        }
    }
    log.mean_return = log.agent_returns().mean();
    return log;
}

}  // namespace

EpisodeLog rollout(const EnvSpec& spec, const TrainState& state, std::span<const AgentSeed> agents,
                   const RolloutOptions& options) {
    const BeliefMode mode = options.coupling.value_or(state.config.belief);
    return run_episode(
        spec, state.config.grid, agents, options.deterministic ? 0.0 : state.actor.std,
        state.actor.std,
        [&](const Eigen::Matrix2Xd& xs, int k) -> Eigen::Matrix2Xd {
            return state.actor.mean.forward_batch(actor_inputs(state, xs, k)).output;
        },
        [&](const EpisodeLog& log, int k) -> const DensityGrid& {
            return coupling_grid(state, log, k, mode);
        });
}

EpisodeLog simulate(const EnvSpec& spec, const GridShape& grid, const Controller& controller,
                    std::span<const AgentSeed> agents) {
    spec.validate();
    if (!grid.valid()) throw Error("invalid grid");
    return run_episode(
        spec, grid, agents, 0.0, 1.0,
        [&](const Eigen::Matrix2Xd& xs, int k) -> Eigen::Matrix2Xd {
            Eigen::Matrix2Xd u = controller(xs, k);
            if (u.cols() != xs.cols()) throw ShapeError("controller returned wrong column count");
            return u;
        },
        [](const EpisodeLog& log, int k) -> const DensityGrid& { return log.measures.at(k); });
}

EpisodeLog rollout(const EnvSpec& spec, const TrainState& state, int agents, SplitMix64& rng,
                   const RolloutOptions& options) {
    const auto seeds = draw_agents(spec, agents, rng);
    return rollout(spec, state, seeds, options);
}

double apply_belief_update(TrainState& state, const EpisodeLog& log) {
    if (log.measures.size() != state.beliefs.size()) throw ShapeError("belief/horizon mismatch");
    double drift = 0.0;
    for (std::size_t k = 0; k < state.beliefs.size(); ++k) {
        const auto& old = state.beliefs[k];
        BeliefState next = state.config.schedule == ScheduleMode::theory
                               ? fp_update_with_step(
                                     old, log.measures[k],
                                     std::min(1.0, state.config.theory_belief(old.count)))
                               : fp_update(old, log.measures[k]);
        if (old.count > 0) drift = std::max(drift, grid_distance(old.average, next.average));
        state.beliefs[k] = std::move(next);
    }
    return drift;
}

double td_update(TrainState& state, const EnvSpec& spec, const EpisodeLog& log) {
    const auto batch = critic_batch(state, spec, log);
    const double m = static_cast<double>(batch.delta.size());
    const double loss = 0.5 * batch.delta.squaredNorm() / m;
    const Eigen::MatrixXd upstream = -batch.delta / m;
    const Eigen::VectorXd grad = state.critic.backward(batch.tape, upstream);
    adam_step(state.critic_opt, state.critic.parameters(), grad);
    check_divergence(state);
    return loss;
}

double pg_update(TrainState& state, const EnvSpec& spec, const EpisodeLog& log) {
    const auto batch = critic_batch(state, spec, log);
    const int T = log.horizon;
    const int n = log.agents;
    const Eigen::Index m = static_cast<Eigen::Index>(T) * n;
    const int dim = actor_input_dim(state.config, T);

    Eigen::MatrixXd inputs(dim, m);
    Eigen::MatrixXd actions(2, m);
    for (int k = 0; k < T; ++k) {
        inputs.middleCols(static_cast<Eigen::Index>(k) * n, n) =
            actor_inputs(state, log.states[k], k);
        actions.middleCols(static_cast<Eigen::Index>(k) * n, n) = log.actions[k];
    }
    Eigen::RowVectorXd adv = batch.delta;
    const double decay = spec.gamma * state.config.gae_lambda;
    if (decay > 0.0) {
        for (int k = T - 2; k >= 0; --k) {
            const Eigen::Index at = static_cast<Eigen::Index>(k) * n;
            adv.segment(at, n) += decay * adv.segment(at + n, n);
        }
    }
    const auto tape = state.actor.mean.forward_batch(inputs);
    const double var = state.actor.std * state.actor.std;
    // Ascent direction: mean_i A_i (a_i - mu_i) / var * dmu/dtheta.
    Eigen::MatrixXd upstream = (actions - tape.output) / var;
    upstream.array().rowwise() *= adv.array() / static_cast<double>(m);
    const Eigen::VectorXd ascent = state.actor.mean.backward(tape, upstream);
    const double scale = state.config.schedule == ScheduleMode::theory
                             ? state.config.theory_actor(state.episode)
                             : 1.0;
    adam_step(state.actor_opt, state.actor.mean.parameters(), -ascent, scale);
    check_divergence(state);
    return ascent.norm();
}

TrainResult train(const EnvSpec& spec, const LearnerConfig& config,
                  const EpisodeObserver& observer) {
    return train(spec, init_train_state(spec, config), config.episodes, observer);
}

TrainResult train(const EnvSpec& spec, TrainState state, int episodes,
                  const EpisodeObserver& observer) {
    spec.validate();
    if (spec.horizon != state.horizon) throw ShapeError("train state horizon does not match env");
    TrainResult result;
    result.trace.reserve(std::max(episodes, 0));
    try {
        for (int e = 0; e < episodes; ++e) {
            SplitMix64 rng(mix_seed(state.config.seed, 0xe915, static_cast<std::uint64_t>(state.episode)));
            const auto log = rollout(spec, state, state.config.agents, rng);
            TraceRow row;
            row.episode = state.episode;
            row.mean_return = log.mean_return;
            row.belief_drift = apply_belief_update(state, log);
            row.critic_loss = td_update(state, spec, log);
            row.actor_grad_norm = pg_update(state, spec, log);
            ++state.episode;
            result.trace.push_back(row);
            if (observer) observer(state, log, row);
        }
    } catch (const DivergenceError& e) {
        result.diverged = true;
        result.error = e.what();
    }
    result.state = std::move(state);
    return result;
}

}  // namespace mfrl
