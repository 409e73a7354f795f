#pragma once

#include "ddmpc/lti_mpc.hpp"
#include "ddmpc/nl_mpc.hpp"
#include "ddmpc/plant.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ddmpc {

enum class PlantKind { FourTank, Lti };
enum class ControllerKind { Nonlinear, LtiNominal, LtiRobust };

std::string to_string(PlantKind kind);
std::string to_string(ControllerKind kind);

struct PlantSpec {
    PlantKind kind = PlantKind::FourTank;
    FourTankParams four_tank;
    // Applied on top of `four_tank` when spread > 0.
    double perturbation_spread = 0.0;
    std::uint64_t perturbation_seed = 0;
    double sample_time = 1.5;
    int substeps = 1;
    LtiSystem lti;
    Vector x0;
    // Uniform output noise bound; 0 disables noise.
    double noise_bound = 0.0;
    std::uint64_t noise_seed = 0;

    Index input_dim() const;
    Index output_dim() const;
    Index state_dim() const;
    /// Effective four-tank parameters after the optional perturbation.
    FourTankParams effective_four_tank() const;
};

/// Uniform i.i.d. excitation on a box, applied on steps 0..steps-1.
struct ExcitationSpec {
    Vector lower;
    Vector upper;
    Index steps = 0;
    std::uint64_t seed = 0;
};

struct SetpointChange {
    Index start = 0;
    Vector y_target;
};

struct ExperimentConfig {
    std::string name;
    PlantSpec plant;
    ControllerKind controller = ControllerKind::Nonlinear;
    NlControllerConfig nonlinear;
    LtiControllerConfig lti;
    ExcitationSpec excitation;
    Index steps = 0;  // total simulated steps (T_end)
    // Nonlinear controller only; the first entry is the initial target.
    std::vector<SetpointChange> schedule;
    // Closed-loop cost sum_{t >= cost_start} |y_t - y_target(t)|_S^2.
    Matrix cost_weight;
    std::optional<Index> cost_start;  // defaults to excitation.steps
    std::string csv_path;             // empty: no log file
    bool record_wall_time = true;

    Index first_cost_step() const { return cost_start.value_or(excitation.steps); }
    /// Throws ConfigError.
    void validate() const;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Target in force at step t.
Vector target_at(const std::vector<SetpointChange>& schedule, Index t);

/// Parses the YAML configuration format. Unknown keys and type errors raise
/// ConfigError carrying the line number.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& cfg);
void save_config(const ExperimentConfig& cfg, const std::string& path);

/// Names accepted by builtin_config.
std::vector<std::string> builtin_config_names();
/// fourtank_nominal, fourtank_schedule, fourtank_perturbed, lti_nominal_demo,
/// lti_robust_demo.
ExperimentConfig builtin_config(const std::string& name);
/// A builtin name or a path to a YAML file.
ExperimentConfig resolve_config(const std::string& name_or_path);

}  // namespace ddmpc
