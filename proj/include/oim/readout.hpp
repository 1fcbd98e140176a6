#pragma once

// Phase readout: spin classification relative to a reference oscillator,
// the Kuramoto order parameter, and an ideal-element emulation of the
// multiplier/integrator phase detector.

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace oim {

/// Wrap to [0, 2*pi). Throws std::invalid_argument on non-finite input.
double wrap_phase(double x);

/// Wrap to (-pi, pi].
double wrap_to_pi(double x);

/// Smallest angle between two phases, in [0, pi].
double angular_distance(double a, double b);

/// Magnitude and mean angle of the population phase centroid.
struct OrderParameter {
    double r = 0.0;    // in [0, 1]
    double psi = 0.0;  // in [0, 2*pi); 0 when r underflows
};

OrderParameter order_parameter(std::span<const double> theta);

enum class SpinMode { kBinary, kTernary };

/// Spin classification of a phase vector relative to one oscillator.
/// Binary mode assigns {-1,+1}; ternary mode {-1,0,+1}. Oscillators whose
/// relative phase sits inside the ambiguity band around the class
/// boundaries are listed in `unresolved` (they still get the nearest
/// class).
struct SpinAssignment {
    std::vector<int> spins;
    int reference_index = 0;
    SpinMode mode = SpinMode::kBinary;
    std::vector<int> unresolved;

    /// Binary: '0' = in phase with the reference, '1' = antiphase.
    /// Ternary: '+', '0', '-'.
    std::string bitstring() const;

    /// 1-based vertex sets {spin=+1} and {spin=-1} (binary mode).
    std::pair<std::vector<int>, std::vector<int>> partition_sets() const;
};

/// Classify each phase as in-phase (+1) or antiphase (-1) with oscillator
/// `ref`. An oscillator is unresolved when |cos(theta_i - theta_ref)| <
/// sin(tol), i.e. the relative phase lies within tol of +-pi/2.
/// Requires 0 < tol < pi/2.
SpinAssignment binarize(std::span<const double> theta, int ref, double tol = 0.3);

/// Snap relative phases to the nearest of {0, 2pi/3, 4pi/3}, mapping to
/// spins {+1, 0, -1}. Unresolved when farther than (pi/3 - tol) from every
/// lock state.
SpinAssignment ternarize(std::span<const double> theta, int ref, double tol = 0.3);

inline constexpr double kDetectorClampVolts = 4.7;
inline constexpr int kDetectorSaturationPeriods = 3;

/// Emulate one analog phase detector: multiply sin(w t + theta_i) with the
/// reference oscillator, run the (inverting) integrator, and clamp the
/// output into [0, 4.7] V continuously, as the diode pair does. The gain
/// saturates the clamp after kDetectorSaturationPeriods periods at full
/// antiphase. In phase reads ~0 V, antiphase reads 4.7 V.
double phase_detector_voltage(double theta_i, double theta_ref, int periods = kDetectorSaturationPeriods);

}  // namespace oim
