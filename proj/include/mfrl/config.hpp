#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mfrl/envs.hpp"
#include "mfrl/learner.hpp"

namespace mfrl {

enum class Experiment {
    congestion,
    congestion_bimodal,
    demand,
    lqr,
    oracle_fp,
    oracle_scaling,
    oracle_potential,
};

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view name);  // throws ConfigError(0, ...)

struct OracleConfig {
    // ring game used by oracle-fp and oracle-scaling
    int states = 4;
    int horizon = 4;
    int target = 0;
    double base = 0.5;
    double move_cost = 0.05;
    int iterations = 500;

    std::vector<int> sizes{8, 16, 32, 64, 128, 256, 512, 1024};
    int trials = 200;

    int potential_agents = 2;
    int potential_states = 2;
    int potential_actions = 2;
    int potential_horizon = 1;
    int deviations = 100;
    double crowding = 1.0;
};

struct RunConfig {
    Experiment experiment = Experiment::congestion;
    EnvSpec env;
    LearnerConfig learner;
    OracleConfig oracle;

    int repeats = 1;
    std::vector<double> alphas;   // congestion sweep; empty means env.alpha only
    std::vector<Vec2> init_means; // demand sweep; empty means env.init_mean only

    int eval_agents = 200;     // population for the post-training evaluation
    int window = 200;          // stabilization / terminal window in episodes
    int burn_in = 10;          // lqr: first time index pooled into stationary stats
    int snapshot_every = 500;  // belief snapshots every K episodes (0 disables)
    std::string out = "out";

    void validate() const;  // throws ConfigError(0, ...)
};

// Defaults for an experiment, including its training hyperparameters.
RunConfig default_config(Experiment e);

// `key = value` lines, `#` comments, dotted keys. `experiment` is required
// and selects the defaults; every other key overrides one field.
RunConfig parse_config(std::string_view text);

// Applies one `key = value` setting; `line` is used in error messages.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value, int line = 0);

// Every key in a fixed order; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const RunConfig& config);

// All recognized keys, in serialization order.
std::vector<std::string> config_keys();

}  // namespace mfrl
