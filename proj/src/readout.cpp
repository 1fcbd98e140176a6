#include "oim/readout.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPi = std::numbers::pi;

void require_finite(std::span<const double> theta) {
    for (double x : theta)
        if (!std::isfinite(x)) throw std::invalid_argument("phase must be finite");
}

void require_reference(std::span<const double> theta, int ref) {
    if (theta.empty()) throw std::invalid_argument("empty phase vector");
    if (ref < 0 || ref >= static_cast<int>(theta.size()))
        throw std::invalid_argument("reference index out of range");
}

void require_tolerance(double tol) {
    if (!(tol > 0.0) || !(tol < kPi / 2.0))
        throw std::invalid_argument("tolerance must lie in (0, pi/2)");
}

}  // namespace

double wrap_phase(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("phase must be finite");
    double y = std::fmod(x, kTwoPi);
    if (y < 0.0) y += kTwoPi;
    if (y >= kTwoPi) y = 0.0;  // fmod result plus 2*pi can round up to 2*pi
    return y;
}

double wrap_to_pi(double x) {
    double y = wrap_phase(x);
    return y > kPi ? y - kTwoPi : y;
}

double angular_distance(double a, double b) {
    return std::fabs(wrap_to_pi(a - b));
}

OrderParameter order_parameter(std::span<const double> theta) {
    if (theta.empty()) throw std::invalid_argument("empty phase vector");
    require_finite(theta);
    double sx = 0.0, sy = 0.0;
    for (double t : theta) {
        sx += std::cos(t);
        sy += std::sin(t);
    }
    const double n = static_cast<double>(theta.size());
    OrderParameter p;
    p.r = std::min(1.0, std::sqrt(sx * sx + sy * sy) / n);
    p.psi = p.r < 1e-12 ? 0.0 : wrap_phase(std::atan2(sy, sx));
    return p;
}

std::string SpinAssignment::bitstring() const {
    std::string out;
    out.reserve(spins.size());
    for (int s : spins) {
        if (mode == SpinMode::kBinary)
            out += s == 1 ? '0' : '1';
        else
            out += s == 1 ? '+' : (s == 0 ? '0' : '-');
    }
    return out;
}

std::pair<std::vector<int>, std::vector<int>> SpinAssignment::partition_sets() const {
    std::vector<int> plus, minus;
    for (std::size_t i = 0; i < spins.size(); ++i) {
        if (spins[i] == 1) plus.push_back(static_cast<int>(i) + 1);
        if (spins[i] == -1) minus.push_back(static_cast<int>(i) + 1);
    }
    return {plus, minus};
}

SpinAssignment binarize(std::span<const double> theta, int ref, double tol) {
    require_reference(theta, ref);
    require_tolerance(tol);
    require_finite(theta);

    SpinAssignment out;
    out.reference_index = ref;
    out.mode = SpinMode::kBinary;
    out.spins.reserve(theta.size());
    const double band = std::sin(tol);  // |cos| below this means within tol of +-pi/2
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double c = std::cos(theta[i] - theta[ref]);
        out.spins.push_back(c > 0.0 ? 1 : -1);
        if (std::fabs(c) < band) out.unresolved.push_back(static_cast<int>(i));
    }
    return out;
}

SpinAssignment ternarize(std::span<const double> theta, int ref, double tol) {
    require_reference(theta, ref);
    require_tolerance(tol);
    require_finite(theta);

    static constexpr double locks[3] = {0.0, kTwoPi / 3.0, 2.0 * kTwoPi / 3.0};
    static constexpr int lock_spin[3] = {1, 0, -1};

    SpinAssignment out;
    out.reference_index = ref;
    out.mode = SpinMode::kTernary;
    out.spins.reserve(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double d = theta[i] - theta[ref];
        int nearest = 0;
        double best = angular_distance(d, locks[0]);
        for (int k = 1; k < 3; ++k) {
            const double dist = angular_distance(d, locks[k]);
            if (dist < best) {
                best = dist;
                nearest = k;
            }
        }
        out.spins.push_back(lock_spin[nearest]);
        if (best > kPi / 3.0 - tol) out.unresolved.push_back(static_cast<int>(i));
    }
    return out;
}

double phase_detector_voltage(double theta_i, double theta_ref, int periods) {
    if (periods < 1) throw std::invalid_argument("need at least one period");
    if (!std::isfinite(theta_i) || !std::isfinite(theta_ref))
        throw std::invalid_argument("phase must be finite");

    // Gain sized so a fully antiphase pair saturates the clamp after
    // kDetectorSaturationPeriods periods: g * pi * periods = clamp.
    const double gain = kDetectorClampVolts / (kPi * kDetectorSaturationPeriods);
    constexpr int steps_per_period = 4096;
    const double dt = kTwoPi / steps_per_period;
    const long steps = static_cast<long>(periods) * steps_per_period;

    double v = 0.0;
    for (long k = 0; k < steps; ++k) {
        const double t = (static_cast<double>(k) + 0.5) * dt;
        // Inverting integrator over the multiplied signals, diode floor at 0,
        // Zener ceiling at the clamp voltage, both acting continuously.
        v -= gain * std::sin(t + theta_i) * std::sin(t + theta_ref) * dt;
        if (v < 0.0) v = 0.0;
        if (v > kDetectorClampVolts) v = kDetectorClampVolts;
    }
    return v;
}

}  // namespace oim
