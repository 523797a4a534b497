#include "mfrl/nplayer.hpp"

#include <cmath>
#include <random>

#include "mfrl/error.hpp"

namespace mfrl {

namespace {

template <class Row>
int sample_index(const Row& probs, std::uniform_real_distribution<double>& u, SplitMix64& rng) {
    const double x = u(rng);
    double acc = 0.0;
    const int n = static_cast<int>(probs.size());
    for (int i = 0; i < n; ++i) {
        acc += probs(i);
        if (x < acc) return i;
    }
    // Round-off: fall back to the last index with positive mass.
    for (int i = n - 1; i >= 0; --i) {
        if (probs(i) > 0.0) return i;
    }
    return n - 1;
}

void check_profile(const DiscreteMFG& game, std::span<const DiscretePolicy> profile, int agent) {
    game.validate();
    if (profile.empty()) throw Error("empty profile");
    if (agent < 0 || agent >= static_cast<int>(profile.size())) throw Error("agent index out of range");
    for (const auto& pi : profile) pi.validate(game);
}

// digits of `code` in base `base`, least significant first
std::vector<int> decode(long code, int base, int n) {
    std::vector<int> out(n);
    for (int i = 0; i < n; ++i) {
        out[i] = static_cast<int>(code % base);
        code /= base;
    }
    return out;
}

long power(int base, int n) {
    long p = 1;
    for (int i = 0; i < n; ++i) p *= base;
    return p;
}

double mean_field_value(const DiscreteMFG& game, const DiscretePolicy& policy) {
    const Flow flow = induced_flow(game, policy);
    return game.initial.dot(evaluate(game, flow, policy)[0]);
}

}  // namespace

double joint_payoff(const DiscreteMFG& game, std::span<const DiscretePolicy> profile, int agent) {
    check_profile(game, profile, agent);
    const int n = static_cast<int>(profile.size());
    const int S = game.states;
    const int A = game.actions;
    const long joint_s = power(S, n);
    const long joint_a = power(A, n);
    if (joint_s * joint_a > 50'000'000L) throw Error("joint enumeration too large");

    Eigen::VectorXd p = Eigen::VectorXd::Zero(joint_s);
    for (long js = 0; js < joint_s; ++js) {
        const auto s = decode(js, S, n);
        double w = 1.0;
        for (int i = 0; i < n; ++i) w *= game.initial(s[i]);
        p(js) = w;
    }

    double total = 0.0;
    for (int t = 0; t < game.horizon; ++t) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(joint_s);
        for (long js = 0; js < joint_s; ++js) {
            if (p(js) == 0.0) continue;
            const auto s = decode(js, S, n);
            int count = 0;
            for (int i = 0; i < n; ++i) count += s[i] == s[agent];
            const double mass = static_cast<double>(count) / n;
            for (long ja = 0; ja < joint_a; ++ja) {
                const auto a = decode(ja, A, n);
                double w = p(js);
                for (int i = 0; i < n && w > 0.0; ++i) w *= profile[i].probs[t](s[i], a[i]);
                if (w == 0.0) continue;
                total += w * game.reward(s[agent], mass, a[agent]);
                for (long ns = 0; ns < joint_s; ++ns) {
                    const auto s2 = decode(ns, S, n);
                    double q = w;
                    for (int i = 0; i < n && q > 0.0; ++i) q *= game.transition[a[i]](s[i], s2[i]);
                    next(ns) += q;
                }
            }
        }
        p = std::move(next);
    }
    return total;
}

double marginal_payoff(const DiscreteMFG& game, std::span<const DiscretePolicy> profile,
                       int agent) {
    check_profile(game, profile, agent);
    const int n = static_cast<int>(profile.size());
    std::vector<Flow> marginals;
    marginals.reserve(n);
    for (const auto& pi : profile) marginals.push_back(induced_flow(game, pi));

    double total = 0.0;
    for (int t = 0; t < game.horizon; ++t) {
        for (int s = 0; s < game.states; ++s) {
            const double own = marginals[agent][t](s);
            if (own == 0.0) continue;
            // Law of the number of other agents in s.
            Eigen::VectorXd others = Eigen::VectorXd::Zero(n);
            others(0) = 1.0;
            for (int j = 0; j < n; ++j) {
                if (j == agent) continue;
                const double q = marginals[j][t](s);
                for (int k = n - 1; k >= 1; --k) others(k) = others(k) * (1.0 - q) + others(k - 1) * q;
                others(0) *= 1.0 - q;
            }
            for (int a = 0; a < game.actions; ++a) {
                const double pa = profile[agent].probs[t](s, a);
                if (pa == 0.0) continue;
                double expected = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (others(k) == 0.0) continue;
                    expected += others(k) * game.reward(s, static_cast<double>(k + 1) / n, a);
                }
                total += own * pa * expected;
            }
        }
    }
    return total;
}

PotentialCheck potential_identity_check(const DiscreteMFG& game, int agents, int deviations,
                                        SplitMix64& rng) {
    if (agents < 1) throw Error("agents must be ≥ 1");
    PotentialCheck out;
    for (int d = 0; d < deviations; ++d) {
        std::vector<DiscretePolicy> profile;
        for (int i = 0; i < agents; ++i) profile.push_back(random_policy(game, rng));
        std::vector<DiscretePolicy> deviated = profile;
        deviated[0] = random_policy(game, rng);

        const double lhs = joint_payoff(game, profile, 0) - joint_payoff(game, deviated, 0);
        const double rhs = marginal_payoff(game, profile, 0) - marginal_payoff(game, deviated, 0);
        out.max_discrepancy = std::max(out.max_discrepancy, std::abs(lhs - rhs));
        ++out.deviations;
    }
    return out;
}

namespace {

double gap_once(const DiscreteMFG& game, const DiscretePolicy& policy, int agents,
                double reference, SplitMix64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> state(agents);
    for (auto& s : state) s = sample_index(game.initial, u, rng);
    std::vector<int> count(game.states);
    double total = 0.0;
    for (int t = 0; t < game.horizon; ++t) {
        std::fill(count.begin(), count.end(), 0);
        for (int s : state) ++count[s];
        for (auto& s : state) {
            const int a = sample_index(policy.probs[t].row(s), u, rng);
            total += game.reward(s, static_cast<double>(count[s]) / agents, a);
            s = sample_index(game.transition[a].row(s), u, rng);
        }
    }
    return std::abs(total / agents - reference);
}

}  // namespace

double nplayer_gap_once(const DiscreteMFG& game, const DiscretePolicy& policy, int agents,
                        SplitMix64& rng) {
    if (agents < 1) throw Error("agents must be ≥ 1");
    return gap_once(game, policy, agents, mean_field_value(game, policy), rng);
}

GapEstimate nplayer_gap(const DiscreteMFG& game, const DiscretePolicy& policy, int agents,
                        int trials, std::uint64_t seed) {
    if (agents < 1) throw Error("agents must be ≥ 1");
    if (trials < 1) throw Error("trials must be ≥ 1");
    const double reference = mean_field_value(game, policy);
    std::vector<double> gaps(trials);
    for (int k = 0; k < trials; ++k) {
        SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(agents), static_cast<std::uint64_t>(k)));
        gaps[k] = gap_once(game, policy, agents, reference, rng);
    }
    GapEstimate est;
    for (double g : gaps) est.mean += g;
    est.mean /= trials;
    if (trials > 1) {
        double ss = 0.0;
        for (double g : gaps) ss += (g - est.mean) * (g - est.mean);
        est.std = std::sqrt(ss / (trials - 1));
    }
    return est;
}

std::vector<ScalingRow> scaling_experiment(const DiscreteMFG& game, const DiscretePolicy& policy,
                                           std::span<const int> sizes, int trials,
                                           std::uint64_t seed) {
    std::vector<ScalingRow> rows;
    for (int n : sizes) {
        const auto est = nplayer_gap(game, policy, n, trials, seed);
        rows.push_back({n, trials, est.mean, est.std});
    }
    return rows;
}

double loglog_slope(std::span<const ScalingRow> rows) {
    if (rows.size() < 2) throw Error("slope needs at least two sizes");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& r : rows) {
        if (!(r.gap_mean > 0.0)) throw Error("gap must be positive for a log-log fit");
        const double x = std::log(static_cast<double>(r.agents));
        const double y = std::log(r.gap_mean);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(rows.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

DiscreteMFG random_game(int states, int actions, int horizon, double crowding, SplitMix64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DiscreteMFG g;
    g.states = states;
    g.actions = actions;
    g.horizon = horizon;
    g.transition.assign(actions, Eigen::MatrixXd(states, states));
    for (auto& p : g.transition) {
        for (int s = 0; s < states; ++s) {
            for (int s2 = 0; s2 < states; ++s2) p(s, s2) = u(rng) + 0.05;
            p.row(s) /= p.row(s).sum();
        }
    }
    Eigen::MatrixXd table(states, actions);
    for (int s = 0; s < states; ++s) {
        for (int a = 0; a < actions; ++a) table(s, a) = u(rng);
    }
    g.reward = [table, crowding](int s, double mass, int a) {
        return table(s, a) / std::pow(1.0 + mass, crowding);
    };
    g.initial.resize(states);
    for (int s = 0; s < states; ++s) g.initial(s) = u(rng) + 0.05;
    g.initial /= g.initial.sum();
    g.validate();
    return g;
}

DiscretePolicy random_policy(const DiscreteMFG& game, SplitMix64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DiscretePolicy pi;
    pi.probs.assign(game.horizon, Eigen::MatrixXd(game.states, game.actions));
    for (auto& table : pi.probs) {
        for (int s = 0; s < game.states; ++s) {
            for (int a = 0; a < game.actions; ++a) table(s, a) = u(rng) + 1e-3;
            table.row(s) /= table.row(s).sum();
        }
    }
    return pi;
}

}  // namespace mfrl
