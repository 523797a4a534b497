#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace mfrl {

// Finite-horizon mean-field game on finite state and action sets.
// Rewards are collected at t = 0..T-1 from the state occupied at t, the mass
// of the flow on that state, and the chosen action; then the agent moves.
struct DiscreteMFG {
    using Reward = std::function<double(int state, double mass, int action)>;

    int states = 0;
    int actions = 0;
    int horizon = 0;
    std::vector<Eigen::MatrixXd> transition;  // per action, row-stochastic S x S
    Reward reward;
    Eigen::VectorXd initial;

    void validate() const;
};

// flow[t] is the population distribution at time t, t = 0..T.
using Flow = std::vector<Eigen::VectorXd>;

struct DiscretePolicy {
    std::vector<Eigen::MatrixXd> probs;  // per step t = 0..T-1, S x A, rows sum to 1

    static DiscretePolicy uniform(const DiscreteMFG& game);
    void validate(const DiscreteMFG& game) const;
};

// value[t](s): expected reward collected from time t on, t = 0..T (value[T] = 0).
using ValueTable = std::vector<Eigen::VectorXd>;

void validate_flow(const DiscreteMFG& game, const Flow& flow);

struct BestResponse {
    DiscretePolicy policy;  // deterministic
    ValueTable value;
};

// Backward induction against a frozen flow; ties go to the lowest action.
BestResponse best_response(const DiscreteMFG& game, const Flow& flow);

// Value of a policy against a frozen flow.
ValueTable evaluate(const DiscreteMFG& game, const Flow& flow, const DiscretePolicy& policy);

Flow induced_flow(const DiscreteMFG& game, const DiscretePolicy& policy);

enum class ExploitabilityWeighting {
    initial,     // sum_s mu0(s) gap(s)
    worst_case,  // max_s gap(s)
};

double exploitability(const DiscreteMFG& game, const DiscretePolicy& policy,
                      ExploitabilityWeighting weighting = ExploitabilityWeighting::initial);

// Largest over t of the L1 distance between two flows.
double flow_distance(const Flow& a, const Flow& b);

struct FictitiousPlayResult {
    DiscretePolicy policy;  // flow-weighted mixture of all best responses so far
    Flow flow;              // running average of the induced flows
    std::vector<double> exploitability;  // of the mixture, per iteration
    std::vector<Flow> induced;           // flow of each best response
};

// Each iteration best-responds to the current average flow and folds the
// response's own flow into the average. `seed` (default: the uniform policy's
// flow) only drives the first best response.
FictitiousPlayResult fictitious_play(const DiscreteMFG& game, int iterations,
                                     const std::optional<Flow>& seed = std::nullopt);

// Ring of `states` cells with actions stay (0) and step forward (1). Every
// cell pays weight/(1 + mass), with weight 1 on `target` and `base` elsewhere;
// stepping costs `move_cost`. The reward is strictly decreasing in mass at
// every cell, which makes the game strictly monotone.
DiscreteMFG monotone_ring_game(int states = 4, int horizon = 4, int target = 0,
                               double base = 0.5, double move_cost = 0.05);

}  // namespace mfrl
