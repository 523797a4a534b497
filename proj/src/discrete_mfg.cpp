#include "mfrl/discrete_mfg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfrl/error.hpp"

namespace mfrl {

namespace {

constexpr double kTol = 1e-12;

bool is_distribution(const Eigen::VectorXd& p, Eigen::Index size) {
    if (p.size() != size) return false;
    if (!p.allFinite() || (p.array() < 0.0).any()) return false;
    return std::abs(p.sum() - 1.0) <= kTol;
}

}  // namespace

void DiscreteMFG::validate() const {
    if (states < 1 || actions < 1 || horizon < 1) throw Error("game needs states, actions and a horizon");
    if (static_cast<int>(transition.size()) != actions) throw ShapeError("one transition matrix per action");
    for (const auto& p : transition) {
        if (p.rows() != states || p.cols() != states) throw ShapeError("transition must be S x S");
        for (Eigen::Index s = 0; s < states; ++s) {
            if (!is_distribution(p.row(s).transpose(), states)) {
                throw Error("transition rows must be distributions");
            }
        }
    }
    if (!reward) throw Error("game has no reward");
    if (!is_distribution(initial, states)) throw Error("initial distribution must sum to 1");
}

DiscretePolicy DiscretePolicy::uniform(const DiscreteMFG& game) {
    DiscretePolicy pi;
    pi.probs.assign(game.horizon,
                    Eigen::MatrixXd::Constant(game.states, game.actions, 1.0 / game.actions));
    return pi;
}

void DiscretePolicy::validate(const DiscreteMFG& game) const {
    if (static_cast<int>(probs.size()) != game.horizon) throw ShapeError("policy needs one table per step");
    for (const auto& table : probs) {
        if (table.rows() != game.states || table.cols() != game.actions) {
            throw ShapeError("policy table must be S x A");
        }
        for (Eigen::Index s = 0; s < table.rows(); ++s) {
            if (!is_distribution(table.row(s).transpose(), game.actions)) {
                throw Error("policy rows must be distributions");
            }
        }
    }
}

void validate_flow(const DiscreteMFG& game, const Flow& flow) {
    if (static_cast<int>(flow.size()) != game.horizon + 1) throw Error("invalid flow: wrong length");
    for (const auto& m : flow) {
        if (!is_distribution(m, game.states)) throw Error("invalid flow");
    }
}

BestResponse best_response(const DiscreteMFG& game, const Flow& flow) {
    game.validate();
    validate_flow(game, flow);
    const int S = game.states;
    const int A = game.actions;
    BestResponse br;
    br.value.assign(game.horizon + 1, Eigen::VectorXd::Zero(S));
    br.policy.probs.assign(game.horizon, Eigen::MatrixXd::Zero(S, A));
    for (int t = game.horizon - 1; t >= 0; --t) {
        for (int s = 0; s < S; ++s) {
            int best_a = 0;
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                const double q = game.reward(s, flow[t](s), a) +
                                 game.transition[a].row(s).dot(br.value[t + 1]);
                if (q > best + kTol * std::max(1.0, std::abs(best)) || a == 0) {
                    best = q;
                    best_a = a;
                }
            }
            br.value[t](s) = best;
            br.policy.probs[t](s, best_a) = 1.0;
        }
    }
    return br;
}

ValueTable evaluate(const DiscreteMFG& game, const Flow& flow, const DiscretePolicy& policy) {
    game.validate();
    validate_flow(game, flow);
    policy.validate(game);
    ValueTable v(game.horizon + 1, Eigen::VectorXd::Zero(game.states));
    for (int t = game.horizon - 1; t >= 0; --t) {
        for (int s = 0; s < game.states; ++s) {
            double total = 0.0;
            for (int a = 0; a < game.actions; ++a) {
                const double p = policy.probs[t](s, a);
                if (p == 0.0) continue;
                total += p * (game.reward(s, flow[t](s), a) + game.transition[a].row(s).dot(v[t + 1]));
            }
            v[t](s) = total;
        }
    }
    return v;
}

Flow induced_flow(const DiscreteMFG& game, const DiscretePolicy& policy) {
    game.validate();
    policy.validate(game);
    Flow flow(game.horizon + 1);
    flow[0] = game.initial;
    for (int t = 0; t < game.horizon; ++t) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(game.states);
        for (int a = 0; a < game.actions; ++a) {
            const Eigen::VectorXd weight = flow[t].cwiseProduct(policy.probs[t].col(a));
            next += game.transition[a].transpose() * weight;
        }
        flow[t + 1] = next;
    }
    return flow;
}

double exploitability(const DiscreteMFG& game, const DiscretePolicy& policy,
                      ExploitabilityWeighting weighting) {
    const Flow flow = induced_flow(game, policy);
    const auto br = best_response(game, flow);
    const auto own = evaluate(game, flow, policy);
    const Eigen::VectorXd gap = br.value[0] - own[0];
    const double eps = weighting == ExploitabilityWeighting::initial ? game.initial.dot(gap)
                                                                     : gap.maxCoeff();
    return std::max(0.0, eps);
}

double flow_distance(const Flow& a, const Flow& b) {
    if (a.size() != b.size()) throw ShapeError("flow length mismatch");
    double d = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        if (a[t].size() != b[t].size()) throw ShapeError("flow size mismatch");
        d = std::max(d, (a[t] - b[t]).cwiseAbs().sum());
    }
    return d;
}

FictitiousPlayResult fictitious_play(const DiscreteMFG& game, int iterations,
                                     const std::optional<Flow>& seed) {
    if (iterations < 1) throw Error("fictitious play needs at least one iteration");
    game.validate();
    const int S = game.states;
    const int A = game.actions;
    const int T = game.horizon;

    Flow target = seed ? *seed : induced_flow(game, DiscretePolicy::uniform(game));
    validate_flow(game, target);

    FictitiousPlayResult out;
    // Flow-weighted policy sums: weighted[t](s, a) = sum_j flow_j[t](s) pi_j[t](a|s).
    std::vector<Eigen::MatrixXd> weighted(T, Eigen::MatrixXd::Zero(S, A));
    std::vector<Eigen::MatrixXd> plain(T, Eigen::MatrixXd::Zero(S, A));
    Flow sum(T + 1, Eigen::VectorXd::Zero(S));

    for (int n = 1; n <= iterations; ++n) {
        const auto br = best_response(game, target);
        const Flow flow = induced_flow(game, br.policy);
        for (int t = 0; t <= T; ++t) sum[t] += flow[t];
        for (int t = 0; t < T; ++t) {
            weighted[t] += flow[t].asDiagonal() * br.policy.probs[t];
            plain[t] += br.policy.probs[t];
        }
        out.induced.push_back(flow);

        Flow avg(T + 1);
        for (int t = 0; t <= T; ++t) avg[t] = sum[t] / static_cast<double>(n);
        DiscretePolicy mix;
        mix.probs.resize(T);
        for (int t = 0; t < T; ++t) {
            mix.probs[t].resize(S, A);
            for (int s = 0; s < S; ++s) {
                const double mass = weighted[t].row(s).sum();
                if (mass > 0.0) {
                    mix.probs[t].row(s) = weighted[t].row(s) / mass;
                } else {
                    // Unvisited state: plain average of the responses.
                    mix.probs[t].row(s) = plain[t].row(s) / static_cast<double>(n);
                }
            }
        }
        out.exploitability.push_back(exploitability(game, mix));
        out.policy = std::move(mix);
        out.flow = avg;
        target = std::move(avg);
    }
    return out;
}

DiscreteMFG monotone_ring_game(int states, int horizon, int target, double base,
                               double move_cost) {
    if (states < 2) throw Error("ring needs at least two states");
    if (target < 0 || target >= states) throw Error("target outside the ring");
    if (!(base > 0.0)) throw Error("base weight must be > 0");
    DiscreteMFG g;
    g.states = states;
    g.actions = 2;
    g.horizon = horizon;
    g.transition.assign(2, Eigen::MatrixXd::Zero(states, states));
    for (int s = 0; s < states; ++s) {
        g.transition[0](s, s) = 1.0;
        g.transition[1](s, (s + 1) % states) = 1.0;
    }
    g.reward = [target, base, move_cost](int s, double mass, int a) {
        const double weight = s == target ? 1.0 : base;
        return weight / (1.0 + mass) - (a == 1 ? move_cost : 0.0);
    };
    g.initial = Eigen::VectorXd::Constant(states, 1.0 / states);
    g.validate();
    return g;
}

}  // namespace mfrl
