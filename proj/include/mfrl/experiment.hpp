#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mfrl/config.hpp"

namespace mfrl {

// Ordered `key value` pairs; the file form is one whitespace-separated pair
// per line. Setting an existing key replaces its value in place.
class Summary {
public:
    void set(std::string_view key, double value);
    void set(std::string_view key, std::string_view value);

    std::optional<std::string> text(std::string_view key) const;
    // Parsed value of `key`, or nullopt when missing or not a number.
    std::optional<double> number(std::string_view key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    void write(std::ostream& out) const;
    static Summary read(std::istream& in);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

struct RunResult {
    int exit_code = 0;  // 0 ok, 1 I/O or runtime failure, 2 config error, 3 divergence
    std::string message;
    Summary summary;
};

// Shortest round-trip decimal form used in every emitted file.
std::string format_number(double x);

// Tag of the learner run for sweep entry `group` and repeat `repeat`.
std::string run_tag(int group, int repeat);

// Number of sweep entries of a learner experiment (alphas, initial means, or 1).
int sweep_size(const RunConfig& config);

// Seed of one learner run; every run owns an independent stream.
std::uint64_t run_seed(const RunConfig& config, int group, int repeat);

// Runs the configured experiment and writes its artifacts into config.out:
// config.txt, summary, and the per-experiment CSV files. Never throws for
// run-time failures; they are reported through the exit code.
RunResult run_experiment(const RunConfig& config);

// Reads the artifacts of a completed run in `dir` and writes whitespace
// delimited series into `dir`/plot. Returns the written paths, sorted.
// Throws Error when an expected artifact is missing.
std::vector<std::string> emit_plotdata(const std::string& dir);

}  // namespace mfrl
