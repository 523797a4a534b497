#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfrl/config.hpp"
#include "mfrl/error.hpp"
#include "mfrl/experiment.hpp"

namespace {

int run_command(const std::string& path, const std::string& seed, const std::string& out,
                const std::vector<std::string>& sets, bool plot) {
    mfrl::RunConfig config;
    try {
        std::ifstream in(path);
        if (!in) throw mfrl::ConfigError(0, "cannot read config file " + path);
        std::stringstream text;
        text << in.rdbuf();
        config = mfrl::parse_config(text.str());
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw mfrl::ConfigError(0, "--set expects key=value, got '" + s + "'");
            mfrl::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
        }
        if (!seed.empty()) mfrl::apply_setting(config, "seed", seed);
        if (!out.empty()) config.out = out;
        config.validate();
    } catch (const mfrl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    const auto result = mfrl::run_experiment(config);
    if (result.exit_code != 0) {
        std::cerr << "error: " << result.message << '\n';
        return result.exit_code;
    }
    result.summary.write(std::cout);
    if (plot) {
        try {
            for (const auto& f : mfrl::emit_plotdata(config.out)) std::cerr << "wrote " << f << '\n';
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-field actor-critic experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment from a config file");
    std::string config_path, seed, out;
    std::vector<std::string> sets;
    bool plot = false;
    run->add_option("config", config_path, "Config file (key = value lines)")->required();
    run->add_option("--seed", seed, "Override the run seed");
    run->add_option("--out", out, "Output directory");
    run->add_option("--set", sets, "Override one key, e.g. --set env.alpha=2")->take_all();
    run->add_flag("--plot", plot, "Also write plot data after the run");

    auto* plotdata = app.add_subcommand("plot-data", "Write plot series for a finished run");
    std::string dir;
    plotdata->add_option("dir", dir, "Run output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*run) return run_command(config_path, seed, out, sets, plot);
    try {
        for (const auto& f : mfrl::emit_plotdata(dir)) std::cout << f << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
