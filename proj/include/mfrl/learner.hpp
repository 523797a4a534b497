#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mfrl/density_grid.hpp"
#include "mfrl/envs.hpp"
#include "mfrl/mlp.hpp"
#include "mfrl/policy.hpp"
#include "mfrl/rng.hpp"

namespace mfrl {

// Which measure the per-step rewards are evaluated against.
enum class BeliefMode {
    averaged,       // the fictitious-play running average of past episodes
    instantaneous,  // the current episode's own empirical measure
};

enum class ScheduleMode {
    fixed,   // constant Adam rates, belief step 1/(n+1)
    theory,  // decaying actor rate a/(n+1), belief step b/(n+1)^0.6
};

// Step-size family scale * (n + 1)^-exponent.
struct PowerSchedule {
    double scale = 1.0;
    double exponent = 1.0;

    double operator()(long n) const;
    bool sum_diverges() const { return exponent <= 1.0; }
    bool square_summable() const { return exponent > 0.5; }
};

// First n >= 0 with schedule(n) < rate, or -1 if the schedule never drops below.
long first_index_below(const PowerSchedule& schedule, double rate);

struct LearnerConfig {
    int agents = 1000;
    int episodes = 2000;
    std::uint64_t seed = 0;

    int hidden = 64;
    double policy_std = 0.1;
    double actor_lr = 1e-4;
    double critic_lr = 1e-4;

    GridShape grid{{-2.0, 2.0, -2.0, 2.0}, 50, 50};
    BeliefMode belief = BeliefMode::averaged;
    ScheduleMode schedule = ScheduleMode::fixed;
    PowerSchedule theory_actor{1.0, 1.0};
    PowerSchedule theory_belief{1.0, 0.6};

    bool critic_density = true;  // feed log(1 + density) to the critic
    bool actor_time = false;     // feed t / T to the actor
    bool critic_zero_output = true;  // start the critic at v = 0
    // Advantage sum_l (gamma lambda)^l delta_{k+l}; 0 gives the plain TD error.
    double gae_lambda = 0.0;

    double divergence_limit = 1e6;

    void validate() const;
};

// Actor/critic parameters, optimizer moments and the time-indexed beliefs
// (index k holds the average measure of agent positions after k steps).
struct TrainState {
    LearnerConfig config;
    int horizon = 1;
    GaussianPolicy actor;
    Mlp critic;
    AdamState actor_opt;
    AdamState critic_opt;
    std::vector<BeliefState> beliefs;
    long episode = 0;
};

TrainState init_train_state(const EnvSpec& spec, const LearnerConfig& config);

// Input layouts of the two networks.
int actor_input_dim(const LearnerConfig& config, int horizon);
int critic_input_dim(const LearnerConfig& config, int horizon);

// An agent is fully described by its start and its private noise stream.
struct AgentSeed {
    Vec2 start;
    std::uint64_t stream = 0;
};

std::vector<AgentSeed> draw_agents(const EnvSpec& spec, int count, SplitMix64& rng);

// Per-step population record. Column j of every matrix belongs to the same
// agent; agents appear in canonical order (sorted by their seeds), which
// makes everything downstream independent of the order they were supplied.
struct EpisodeLog {
    int horizon = 0;
    int agents = 0;
    std::vector<Eigen::Matrix2Xd> states;       // horizon + 1 entries
    std::vector<Eigen::Matrix2Xd> actions;      // horizon entries
    std::vector<Eigen::RowVectorXd> rewards;    // reward for step k, paid on arrival at k+1
    std::vector<Eigen::RowVectorXd> log_probs;  // horizon entries
    std::vector<DensityGrid> measures;          // empirical measure at each of the horizon+1 times
    double mean_return = 0.0;

    const Eigen::Matrix2Xd& terminal() const { return states.back(); }
    Eigen::RowVectorXd agent_returns() const;
    // Mean reward across agents at every step.
    std::vector<double> step_mean_rewards() const;
};

struct RolloutOptions {
    bool deterministic = false;  // act with the policy mean
    // Overrides the state's belief mode when set.
    std::optional<BeliefMode> coupling;
};

EpisodeLog rollout(const EnvSpec& spec, const TrainState& state, std::span<const AgentSeed> agents,
                   const RolloutOptions& options = {});
EpisodeLog rollout(const EnvSpec& spec, const TrainState& state, int agents, SplitMix64& rng,
                   const RolloutOptions& options = {});

// Action means for every agent (one per column) given the states at step k.
using Controller = std::function<Eigen::Matrix2Xd(const Eigen::Matrix2Xd& states, int k)>;

// Noise-free-action rollout of a hand-written controller, priced against the
// episode's own measures. Log-probabilities are filled with a unit std.
EpisodeLog simulate(const EnvSpec& spec, const GridShape& grid, const Controller& controller,
                    std::span<const AgentSeed> agents);

// Folds the episode's measures into the time-indexed beliefs. Returns the
// largest L1 change across the time indices (0 on the first update).
double apply_belief_update(TrainState& state, const EpisodeLog& log);

// One Adam step on 1/2 mean (r + gamma v' - v)^2 with v' = 0 after the last
// step. Returns the loss before the step.
double td_update(TrainState& state, const EnvSpec& spec, const EpisodeLog& log);

// One Adam ascent step along mean grad log pi(a|x) * advantage, where the
// advantage is the lambda-weighted sum of the current critic's TD errors.
// Returns the gradient norm.
double pg_update(TrainState& state, const EnvSpec& spec, const EpisodeLog& log);

struct TraceRow {
    long episode = 0;
    double mean_return = 0.0;
    double belief_drift = 0.0;
    double actor_grad_norm = 0.0;
    double critic_loss = 0.0;
};

struct TrainResult {
    TrainState state;
    std::vector<TraceRow> trace;
    bool diverged = false;
    std::string error;
};

using EpisodeObserver =
    std::function<void(const TrainState&, const EpisodeLog&, const TraceRow&)>;

// Runs config.episodes of rollout -> belief update -> critic -> actor.
TrainResult train(const EnvSpec& spec, const LearnerConfig& config,
                  const EpisodeObserver& observer = {});
// Continues training an existing state for `episodes` more episodes.
TrainResult train(const EnvSpec& spec, TrainState state, int episodes,
                  const EpisodeObserver& observer = {});

}  // namespace mfrl
