#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfrl/discrete_mfg.hpp"
#include "mfrl/rng.hpp"

namespace mfrl {

// Finite-N version of a DiscreteMFG: agent i occupying s at time t is paid
// reward(s, count_t(s) / N, a), where the count includes agent i itself.
// Transitions are independent across agents.

// Expected return of agent `agent` under a profile of Markov policies,
// computed by exhaustive enumeration of joint states and joint actions.
// Cost grows like (S A)^N; meant for N <= 4 or so.
double joint_payoff(const DiscreteMFG& game, std::span<const DiscretePolicy> profile, int agent);

// Same quantity computed from the agent's own state marginals and the
// Poisson-binomial law of how many others share its cell.
double marginal_payoff(const DiscreteMFG& game, std::span<const DiscretePolicy> profile,
                       int agent);

struct PotentialCheck {
    double max_discrepancy = 0.0;
    int deviations = 0;
};

// Random heterogeneous profiles on N agents; for each, agent 0 deviates to a
// random policy. Compares the payoff difference computed by enumeration with
// the potential difference computed from the marginal representation.
PotentialCheck potential_identity_check(const DiscreteMFG& game, int agents, int deviations,
                                        SplitMix64& rng);

// |J_N - J_inf| for one simulated population of N agents all using `policy`:
// J_N is the agents' mean realized return with the empirical measure driving
// rewards, J_inf the exact mean-field value of the policy.
double nplayer_gap_once(const DiscreteMFG& game, const DiscretePolicy& policy, int agents,
                        SplitMix64& rng);

struct GapEstimate {
    double mean = 0.0;
    double std = 0.0;  // sample std across trials
};

// Trials use pre-split streams mix_seed(seed, N, trial).
GapEstimate nplayer_gap(const DiscreteMFG& game, const DiscretePolicy& policy, int agents,
                        int trials, std::uint64_t seed);

struct ScalingRow {
    int agents = 0;
    int trials = 0;
    double gap_mean = 0.0;
    double gap_std = 0.0;
};

std::vector<ScalingRow> scaling_experiment(const DiscreteMFG& game, const DiscretePolicy& policy,
                                           std::span<const int> sizes, int trials,
                                           std::uint64_t seed);

// Least-squares slope of log(gap_mean) against log(N).
double loglog_slope(std::span<const ScalingRow> rows);

// Random game with row-stochastic transitions and a reward table r(s, a)
// discounted by crowding: r(s, a) / (1 + mass)^crowding.
DiscreteMFG random_game(int states, int actions, int horizon, double crowding, SplitMix64& rng);

DiscretePolicy random_policy(const DiscreteMFG& game, SplitMix64& rng);

}  // namespace mfrl
