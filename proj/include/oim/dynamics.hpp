#pragma once

// Coupled phase-oscillator dynamics with harmonic injection locking,
// parameter schedules, optional noise, and fixed-step integrators.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "oim/graph.hpp"
#include "oim/readout.hpp"

namespace oim {

/// Phase vector plus elapsed dimensionless time. Phases are kept wrapped
/// to [0, 2*pi) by the steppers.
struct OscillatorState {
    std::vector<double> theta;
    double t = 0.0;
};

/// Per-oscillator frequency detunings in the rotating frame of the nominal
/// oscillator frequency.
struct NaturalFrequencies {
    std::vector<double> delta_omega;

    static NaturalFrequencies zero(int n);
    static NaturalFrequencies draw(int n, double sigma, std::mt19937_64& rng);
};

/// Scalar parameter schedule: constant, or a linear ramp that holds its
/// final value for t >= t_ramp.
struct Schedule {
    enum class Kind { kConstant, kLinearRamp };
    Kind kind = Kind::kConstant;
    double v0 = 0.0;
    double v1 = 0.0;
    double t_ramp = 0.0;

    static Schedule constant(double v) { return {Kind::kConstant, v, v, 0.0}; }
    static Schedule linear_ramp(double v0, double v1, double t_ramp);

    double value(double t) const;
    bool is_constant() const { return kind == Kind::kConstant || v0 == v1; }
};

enum class Waveform { kSinusoidal, kRectangular, kPulse };
enum class IntegratorKind { kRk4, kEulerMaruyama };

/// All dynamics parameters. Defaults are the tuned reference
/// configuration used throughout the test batteries.
struct SimConfig {
    Schedule coupling_gain = Schedule::constant(0.2);         // c(t), scales the coupling matrix
    Schedule shil_gain = Schedule::linear_ramp(0.0, 0.5, 150.0);  // K_s(t)
    int shil_harmonic = 2;          // 2 binarizes, 3 ternarizes
    Waveform shil_waveform = Waveform::kRectangular;
    double pulse_duty = 0.1;        // duty fraction of the pulse waveform
    double shil_phase_offset = 0.0;
    double shil_detuning = 0.0;     // frequency offset of the injected signal
    double noise_amplitude = 0.0;   // eta; > 0 requires Euler-Maruyama
    double sigma_omega = 0.01;      // detuning spread for drawn frequencies
    double dt = 1e-2;
    double t_end = 200.0;
    IntegratorKind integrator = IntegratorKind::kRk4;
    std::uint64_t seed = 0;
    int sample_stride = 10;         // record every this many steps
    bool early_stop = false;        // stop once the lock-distance metric settles
    bool wrap_phases = true;        // steppers re-wrap after each step

    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

/// Instantaneous parameters the right-hand side sees at one stage time.
struct RhsParams {
    double coupling_scale = 1.0;  // multiplies the coupling matrix
    double shil_gain = 0.0;
    double shil_phase = 0.0;      // phase offset minus detuning * t
    int harmonic = 2;
    Waveform waveform = Waveform::kSinusoidal;
    double pulse_duty = 0.1;
};

/// Evaluate the schedules and injection phase of `cfg` at time t.
RhsParams rhs_params_at(const SimConfig& cfg, double t);

/// Injection waveform f(x): sin(x), sign(sin(x)), or the zero-mean pulse
/// train that is 1 on [0, 2*pi*duty) and -duty/(1-duty) elsewhere.
double waveform_value(Waveform w, double pulse_duty, double x);

/// dtheta_i/dt = dw_i + scale * sum_j J[i][j] sin(theta_j - theta_i)
///             - K_s * f(h * theta_i + shil_phase).
void phase_rhs(std::span<const double> theta, const CouplingMatrix& j,
               std::span<const double> delta_omega, const RhsParams& p,
               std::span<double> dtheta);

std::vector<double> phase_rhs(std::span<const double> theta, const CouplingMatrix& j,
                              std::span<const double> delta_omega, const RhsParams& p);

/// Classical fixed-step RK4 advance by cfg.dt, schedules evaluated at the
/// stage times. Requires noise_amplitude == 0.
void step_rk4(OscillatorState& state, const CouplingMatrix& j,
              const NaturalFrequencies& freqs, const SimConfig& cfg);

/// theta += dt * rhs + sqrt(2 * eta * dt) * xi, with xi i.i.d. standard
/// normal per oscillator drawn from `rng` in index order.
void step_euler_maruyama(OscillatorState& state, const CouplingMatrix& j,
                         const NaturalFrequencies& freqs, const SimConfig& cfg,
                         std::mt19937_64& rng);

/// Time series recorded by integrate(). All series have equal length.
/// The Lyapunov series is recorded only for the sinusoidal waveform,
/// where the flow is a gradient descent and the potential is defined.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> phases;
    std::vector<double> order_r;
    std::vector<double> order_psi;
    std::vector<double> lyapunov;
    bool has_lyapunov = false;

    std::size_t samples() const { return times.size(); }

    /// CSV with header "t,theta_0,...,theta_{n-1},r,psi[,V]", 12
    /// significant digits.
    std::string to_csv() const;
};

/// Run the configured stepper from t = 0 to cfg.t_end, recording every
/// cfg.sample_stride steps plus the final state. `j` carries the problem
/// weights at unit gain; the coupling schedule scales it over time.
/// `rng` feeds the noise term and may be null for noiseless runs (a
/// generator seeded from cfg.seed is created if Euler-Maruyama needs one).
Trajectory integrate(const CouplingMatrix& j, const NaturalFrequencies& freqs,
                     const SimConfig& cfg, std::span<const double> theta0,
                     std::mt19937_64* rng = nullptr);

/// i.i.d. uniform phases on [0, 2*pi).
std::vector<double> random_initial_phases(int n, std::mt19937_64& rng);

/// V(theta) = -(1/2) sum_{i,j} scale*J[i][j] cos(theta_i - theta_j)
///          - (K_s/h) sum_i cos(h*theta_i + phase_offset),
/// the potential of the zero-detuning sinusoidal flow:
/// dtheta_i/dt = -dV/dtheta_i.
double lyapunov_value(std::span<const double> theta, const CouplingMatrix& j,
                      double shil_gain, int harmonic, double phase_offset = 0.0,
                      double coupling_scale = 1.0);

}  // namespace oim
