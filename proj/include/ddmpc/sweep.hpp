#pragma once

#include "ddmpc/experiment.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ddmpc {

/// Cost threshold of the "good performance" region.
inline constexpr double kGoodCostThreshold = 1.5e5;

/// Parameters accepted by sweep().
std::vector<std::string> sweep_parameters();

/// Copy of `base` with one parameter replaced. N also sets the excitation
/// length, s_bar sets S = s_bar * I. Throws ConfigError for unknown names.
ExperimentConfig with_parameter(const ExperimentConfig& base, const std::string& name, double value);

/// Copy of `base` with excitation and noise seeds set to `seed`.
ExperimentConfig with_seed(const ExperimentConfig& base, std::uint64_t seed);

struct RunOutcome {
    std::uint64_t seed = 0;
    double cost = 0.0;  // infinity when the run failed
    double final_error = 0.0;
    bool converged = false;
    Index infeasible_events = 0;
    std::string error;  // non-empty when the run threw
};

/// Runs every config on a pool of `threads` workers (0: hardware
/// concurrency). Results keep the input order; exceptions are captured.
std::vector<RunOutcome> run_batch(const std::vector<ExperimentConfig>& configs, unsigned threads = 0);

struct SweepPoint {
    double value = 0.0;
    std::vector<RunOutcome> runs;
    double median_cost = 0.0;
    double median_final_error = 0.0;
    bool good = false;       // median cost within the threshold
    bool converged = false;  // median final error within tolerance
};

struct SweepOptions {
    std::vector<std::uint64_t> seeds{1, 2, 3};
    unsigned threads = 0;
    double cost_threshold = kGoodCostThreshold;
};

std::vector<SweepPoint> sweep(const ExperimentConfig& base, const std::string& parameter,
                              const std::vector<double>& grid, const SweepOptions& options = {});

/// Median of a non-empty list (mean of the middle pair for even sizes).
double median(std::vector<double> values);

/// One row per run: parameter, value, seed, J, final_error, converged, error.
void write_sweep_csv(const std::string& parameter, const std::vector<SweepPoint>& points, std::ostream& out);

}  // namespace ddmpc
