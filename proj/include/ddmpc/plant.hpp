#pragma once

#include "ddmpc/sequence.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string>

namespace ddmpc {

// ---------------------------------------------------------------------------
// Four-tank process
// ---------------------------------------------------------------------------

/// Physical parameters of the four-tank process. Cross sections in cm^2,
/// gravity in cm/s^2. Defaults are the published simulation values.
struct FourTankParams {
    double A1 = 50.27;
    double A2 = 50.27;
    double A3 = 28.27;
    double A4 = 28.27;
    double a1 = 0.233;
    double a2 = 0.242;
    double a3 = 0.127;
    double a4 = 0.127;
    double gamma1 = 0.4;
    double gamma2 = 0.4;
    double g = 981.0;

    void validate() const;
    friend bool operator==(const FourTankParams&, const FourTankParams&) = default;
};

class NegativeLevelError : public std::domain_error {
 public:
    using std::domain_error::domain_error;
};

/// Time derivative of the four water levels for pump flows u (cm^3/s).
/// Throws NegativeLevelError for x < 0.
Vector continuous_dynamics(const FourTankParams& p, const Vector& x, const Vector& u);

/// Forward Euler over Ts seconds, split into `substeps` equal steps, levels
/// clamped at zero after each step.
Vector euler_step(const FourTankParams& p, const Vector& x, const Vector& u, double Ts, int substeps = 1);

/// Measured output y = (x1, x2).
Vector four_tank_output(const Vector& x);

/// Steady-state levels for a constant pump input (closed form).
Vector four_tank_equilibrium(const FourTankParams& p, const Vector& u);

/// Each parameter scaled by an independent factor in [1 - spread, 1 + spread];
/// gamma stays inside (0, 1). spread must lie in [0, 0.5].
FourTankParams perturbed_four_tank(const FourTankParams& p, double relative_spread, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Measurement noise
// ---------------------------------------------------------------------------

enum class NoiseKind { None, UniformInf };

/// Additive output noise. UniformInf draws each channel i.i.d. from
/// [-eps_bar, eps_bar], so every sample satisfies ||e||_inf <= eps_bar.
class NoiseModel {
 public:
    NoiseModel() = default;
    static NoiseModel none() { return NoiseModel(); }
    static NoiseModel uniform_inf(double eps_bar, std::uint64_t seed);

    NoiseKind kind() const { return kind_; }
    double eps_bar() const { return eps_bar_; }
    std::uint64_t seed() const { return seed_; }

    Vector sample(Index dim);

 private:
    NoiseKind kind_ = NoiseKind::None;
    double eps_bar_ = 0.0;
    std::uint64_t seed_ = 0;
    std::mt19937_64 engine_;
};

/// Four-tank output plus one noise draw.
Vector measure(const Vector& x, NoiseModel& noise);

// ---------------------------------------------------------------------------
// Linear time-invariant systems
// ---------------------------------------------------------------------------

struct LtiTrajectory {
    Matrix states;  // n x (N + 1), including the final state
    Sequence outputs;
};

/// x+ = A x + B u,  y = C x + D u.
struct LtiSystem {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;

    Index n() const { return A.rows(); }
    Index m() const { return B.cols(); }
    Index p() const { return C.rows(); }

    void validate() const;
    Vector next_state(const Vector& x, const Vector& u) const { return A * x + B * u; }
    Vector output(const Vector& x, const Vector& u) const { return C * x + D * u; }
    LtiTrajectory simulate(const Vector& x0, const Sequence& u) const;
    /// State and output of the equilibrium for constant input u (requires I - A invertible).
    std::pair<Vector, Vector> steady_state(const Vector& u) const;
};

struct LtiCertificate {
    Index controllability_rank = 0;
    Index observability_rank = 0;
    double spectral_radius = 0.0;
    // Smallest/largest singular value ratios of the two rank-test matrices.
    double controllability_conditioning = 0.0;
    double observability_conditioning = 0.0;

    bool minimal(Index n) const { return controllability_rank == n && observability_rank == n; }
};

LtiCertificate certify(const LtiSystem& sys, double rank_tolerance = 1e-9);

struct RandomLti {
    LtiSystem system;
    LtiCertificate certificate;
    int attempts = 0;
};

class SamplingFailure : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

/// Random controllable/observable system with spectral radius at most
/// `spectral_radius_max`. Resamples until the rank tests pass with
/// conditioning at least `min_conditioning`.
RandomLti random_lti(Index n, Index m, Index p, double spectral_radius_max, std::uint64_t seed,
                     int max_attempts = 200, double min_conditioning = 1e-4);

/// Euler linearization of the four-tank process around an equilibrium.
LtiSystem linearize_four_tank(const FourTankParams& p, const Vector& x_eq, const Vector& u_eq, double Ts);

// ---------------------------------------------------------------------------
// Simulated plants used by the experiment runner
// ---------------------------------------------------------------------------

/// Stateful, single-owner plant. Each step the runner reads `measure(u)` for
/// the input it is about to apply, then calls `advance(u)`.
class Plant {
 public:
    virtual ~Plant() = default;
    virtual Index input_dim() const = 0;
    virtual Index output_dim() const = 0;
    virtual Index state_dim() const = 0;
    virtual const Vector& state() const = 0;
    /// Noisy measurement of the current output when input u is applied.
    virtual Vector measure(const Vector& u) = 0;
    virtual void advance(const Vector& u) = 0;
};

class FourTankPlant final : public Plant {
 public:
    FourTankPlant(FourTankParams params, Vector x0, double Ts, int substeps, NoiseModel noise);

    Index input_dim() const override { return 2; }
    Index output_dim() const override { return 2; }
    Index state_dim() const override { return 4; }
    const Vector& state() const override { return x_; }
    Vector measure(const Vector& u) override;
    void advance(const Vector& u) override;

    const FourTankParams& params() const { return params_; }

 private:
    FourTankParams params_;
    Vector x_;
    double Ts_;
    int substeps_;
    NoiseModel noise_;
};

class LtiPlant final : public Plant {
 public:
    LtiPlant(LtiSystem sys, Vector x0, NoiseModel noise);

    Index input_dim() const override { return sys_.m(); }
    Index output_dim() const override { return sys_.p(); }
    Index state_dim() const override { return sys_.n(); }
    const Vector& state() const override { return x_; }
    Vector measure(const Vector& u) override;
    void advance(const Vector& u) override;

    const LtiSystem& system() const { return sys_; }

 private:
    LtiSystem sys_;
    Vector x_;
    NoiseModel noise_;
};

}  // namespace ddmpc
