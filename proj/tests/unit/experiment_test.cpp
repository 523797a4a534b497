#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mfrl/error.hpp"
#include "mfrl/experiment.hpp"

using namespace mfrl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mfrl_experiment_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
    return out;
}

int data_rows(const fs::path& p) {
    std::ifstream in(p);
    int n = 0;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line[0] != '#') ++n;
    }
    return n;
}

RunConfig small_congestion(const fs::path& out) {
    auto c = default_config(Experiment::congestion);
    c.learner.agents = 20;
    c.learner.episodes = 12;
    c.learner.seed = 5;
    c.learner.hidden = 8;
    c.learner.grid = GridShape{{-2.0, 2.0, -2.0, 2.0}, 10, 10};
    c.alphas = {1.0, 2.0};
    c.repeats = 2;
    c.eval_agents = 30;
    c.window = 4;
    c.snapshot_every = 6;
    c.out = out.string();
    return c;
}

}  // namespace

TEST(Summary, SetReplacesInPlaceAndRoundTrips) {
    Summary s;
    s.set("a", 1.5);
    s.set("b", "text");
    s.set("a", 0.1);
    ASSERT_EQ(s.entries().size(), 2u);
    EXPECT_EQ(s.entries()[0].first, "a");
    EXPECT_EQ(s.number("a"), 0.1);
    EXPECT_FALSE(s.number("b"));
    EXPECT_FALSE(s.text("missing"));
    std::stringstream io;
    s.write(io);
    const auto back = Summary::read(io);
    EXPECT_EQ(back.entries(), s.entries());
}

TEST(Experiment, Helpers) {
    EXPECT_EQ(run_tag(2, 5), "g2_r5");
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(3.0), "3");
    auto c = default_config(Experiment::congestion);
    EXPECT_EQ(sweep_size(c), 5);
    EXPECT_EQ(sweep_size(default_config(Experiment::demand)), 5);
    EXPECT_EQ(sweep_size(default_config(Experiment::lqr)), 1);
    EXPECT_EQ(sweep_size(default_config(Experiment::oracle_fp)), 0);
    EXPECT_NE(run_seed(c, 0, 0), run_seed(c, 0, 1));
    EXPECT_NE(run_seed(c, 0, 1), run_seed(c, 1, 0));
    EXPECT_EQ(run_seed(c, 1, 1), run_seed(c, 1, 1));
}

TEST(Experiment, OraclePotential) {
    auto c = default_config(Experiment::oracle_potential);
    c.out = scratch("potential").string();
    const auto r = run_experiment(c);
    ASSERT_EQ(r.exit_code, 0) << r.message;
    EXPECT_EQ(r.summary.number("deviations"), 100.0);
    EXPECT_LT(*r.summary.number("max_discrepancy"), 1e-12);
    EXPECT_EQ(r.summary.text("status"), "ok");
    std::ifstream in(fs::path(c.out) / "summary");
    EXPECT_EQ(Summary::read(in).entries(), r.summary.entries());
}

TEST(Experiment, SeededRunsAreByteIdentical) {
    const auto a = scratch("same_a"), b = scratch("same_b");
    auto ca = small_congestion(a), cb = small_congestion(b);
    ASSERT_EQ(run_experiment(ca).exit_code, 0);
    ASSERT_EQ(run_experiment(cb).exit_code, 0);
    auto ta = tree(a), tb = tree(b);
    // config.txt records the output directory
    ta.erase("config.txt");
    tb.erase("config.txt");
    EXPECT_EQ(ta, tb);
    EXPECT_TRUE(ta.count("trace_g1_r1.csv"));
    EXPECT_TRUE(ta.count("belief_g0_r0_e6.csv"));
    EXPECT_TRUE(ta.count("checkpoint_g0_r0.csv"));

    const auto c = scratch("other_seed");
    auto cc = small_congestion(c);
    cc.learner.seed = 6;
    ASSERT_EQ(run_experiment(cc).exit_code, 0);
    EXPECT_NE(slurp(a / "trace_g0_r0.csv"), slurp(c / "trace_g0_r0.csv"));
}

TEST(Experiment, CongestionSummaryAndPlotData) {
    const auto dir = scratch("plot");
    const auto r = run_experiment(small_congestion(dir));
    ASSERT_EQ(r.exit_code, 0) << r.message;
    for (const char* k : {"run.g0_r0.stabilization", "run.g1_r1.belief_dispersion", "group.g1.alpha",
                          "stabilization_max", "dispersion_increasing"}) {
        EXPECT_TRUE(r.summary.text(k)) << k;
    }
    EXPECT_EQ(r.summary.number("group.g1.alpha"), 2.0);

    const auto files = emit_plotdata(dir.string());
    EXPECT_TRUE(std::is_sorted(files.begin(), files.end()));
    EXPECT_EQ(data_rows(dir / "plot" / "reward_g0_r1.dat"), 12);
    EXPECT_EQ(data_rows(dir / "plot" / "reward_mean_g1.dat"), 12);
    EXPECT_TRUE(fs::exists(dir / "plot" / "scatter_alpha_1.dat"));
    EXPECT_TRUE(fs::exists(dir / "plot" / "scatter_alpha_2.dat"));

    fs::remove(dir / "trace_g1_r0.csv");
    try {
        emit_plotdata(dir.string());
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("missing artifact"), std::string::npos);
    }
}

TEST(Experiment, LqrReportsAnalyticReference) {
    auto c = default_config(Experiment::lqr);
    c.learner.agents = 10;
    c.learner.episodes = 3;
    c.learner.hidden = 8;
    c.eval_agents = 10;
    c.window = 2;
    c.out = scratch("lqr").string();
    const auto r = run_experiment(c);
    ASSERT_EQ(r.exit_code, 0) << r.message;
    EXPECT_NEAR(*r.summary.number("analytic_mean_x"), 0.5, 1e-12);
    EXPECT_NEAR(*r.summary.number("analytic_variance_y"), 0.010777034960909286, 1e-12);
    EXPECT_TRUE(r.summary.number("learned_gain"));
    EXPECT_TRUE(r.summary.number("riccati_iterations"));
    EXPECT_TRUE(fs::exists(fs::path(c.out) / "lqr_eval_g0_r0.csv"));
}

TEST(Experiment, DivergenceExitCode) {
    auto c = small_congestion(scratch("diverge"));
    c.learner.divergence_limit = 1e-9;
    const auto r = run_experiment(c);
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_EQ(r.summary.text("status"), "diverged");
    EXPECT_EQ(r.summary.text("diverged_run"), "g0_r0");
    EXPECT_TRUE(fs::exists(fs::path(c.out) / "trace_g0_r0.csv"));
    EXPECT_THROW(emit_plotdata(c.out), Error);
}

TEST(Experiment, ConfigErrorExitCode) {
    auto c = small_congestion(scratch("bad"));
    c.window = 0;
    const auto r = run_experiment(c);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.message.find("window"), std::string::npos);
    EXPECT_FALSE(fs::exists(c.out));
}
