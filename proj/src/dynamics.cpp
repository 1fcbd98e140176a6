#include "oim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace oim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Fraction of a full turn in [0, 1); cheaper than fmod in the stepper loop.
double unit_fraction(double x) {
    double f = x * (1.0 / kTwoPi);
    f -= std::floor(f);
    if (f >= 1.0) f = 0.0;
    return f;
}

struct Scratch {
    std::vector<double> sinv, cosv, k1, k2, k3, k4, stage, rhs;

    void resize(std::size_t n) {
        sinv.resize(n);
        cosv.resize(n);
        k1.resize(n);
        k2.resize(n);
        k3.resize(n);
        k4.resize(n);
        stage.resize(n);
        rhs.resize(n);
    }
};

Scratch& scratch_for(std::size_t n) {
    thread_local Scratch s;
    s.resize(n);
    return s;
}

// Unchecked right-hand side. The pairwise sum is factored through
// sum_k J_ik sin(theta_k - theta_i) = cos_i (J sin)_i - sin_i (J cos)_i,
// which needs one sin/cos per oscillator instead of one per pair.
void rhs_core(std::span<const double> theta, const CouplingMatrix& j,
              std::span<const double> delta_omega, const RhsParams& p,
              std::span<double> out, Scratch& s) {
    const int n = j.n;
    for (int i = 0; i < n; ++i) {
        s.sinv[i] = std::sin(theta[i]);
        s.cosv[i] = std::cos(theta[i]);
    }
    const double* jv = j.values.data();
    for (int i = 0; i < n; ++i) {
        const double* row = jv + static_cast<std::size_t>(i) * n;
        double js = 0.0, jc = 0.0;
        for (int k = 0; k < n; ++k) {
            js += row[k] * s.sinv[k];
            jc += row[k] * s.cosv[k];
        }
        double d = delta_omega[i] + p.coupling_scale * (s.cosv[i] * js - s.sinv[i] * jc);
        if (p.shil_gain != 0.0)
            d -= p.shil_gain *
                 waveform_value(p.waveform, p.pulse_duty, p.harmonic * theta[i] + p.shil_phase);
        out[i] = d;
    }
}

void require_dimensions(const OscillatorState& state, const CouplingMatrix& j,
                        const NaturalFrequencies& freqs) {
    if (static_cast<int>(state.theta.size()) != j.n ||
        static_cast<int>(freqs.delta_omega.size()) != j.n)
        throw std::invalid_argument("state, matrix, and detuning dimensions disagree");
}

}  // namespace

NaturalFrequencies NaturalFrequencies::zero(int n) {
    if (n < 1) throw std::invalid_argument("need at least one oscillator");
    return {std::vector<double>(n, 0.0)};
}

NaturalFrequencies NaturalFrequencies::draw(int n, double sigma, std::mt19937_64& rng) {
    if (n < 1) throw std::invalid_argument("need at least one oscillator");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("detuning spread must be non-negative");
    if (sigma == 0.0) return zero(n);
    std::normal_distribution<double> normal(0.0, sigma);
    NaturalFrequencies f;
    f.delta_omega.reserve(n);
    for (int i = 0; i < n; ++i) f.delta_omega.push_back(normal(rng));
    return f;
}

Schedule Schedule::linear_ramp(double v0, double v1, double t_ramp) {
    if (!std::isfinite(v0) || !std::isfinite(v1) || !std::isfinite(t_ramp) || t_ramp < 0.0)
        throw std::invalid_argument("ramp needs finite values and a non-negative duration");
    return {Kind::kLinearRamp, v0, v1, t_ramp};
}

double Schedule::value(double t) const {
    if (kind == Kind::kConstant) return v0;
    if (t_ramp <= 0.0 || t >= t_ramp) return v1;
    if (t <= 0.0) return v0;
    return v0 + (v1 - v0) * (t / t_ramp);
}

void SimConfig::validate() const {
    auto check_schedule = [](const Schedule& s, const char* what) {
        if (!std::isfinite(s.v0) || !std::isfinite(s.v1) || !std::isfinite(s.t_ramp) ||
            s.t_ramp < 0.0)
            throw std::invalid_argument(std::string(what) + " schedule must be finite");
        if (s.v0 < 0.0 || s.v1 < 0.0)
            throw std::invalid_argument(std::string(what) + " must be non-negative");
    };
    check_schedule(coupling_gain, "coupling gain");
    check_schedule(shil_gain, "injection gain");
    if (shil_harmonic != 2 && shil_harmonic != 3)
        throw std::invalid_argument("injection harmonic must be 2 or 3");
    if (!(pulse_duty > 0.0) || !(pulse_duty < 1.0))
        throw std::invalid_argument("pulse duty must lie in (0, 1)");
    if (!std::isfinite(shil_phase_offset) || !std::isfinite(shil_detuning))
        throw std::invalid_argument("injection phase and detuning must be finite");
    if (!(noise_amplitude >= 0.0) || !std::isfinite(noise_amplitude))
        throw std::invalid_argument("noise amplitude must be non-negative");
    if (!(sigma_omega >= 0.0) || !std::isfinite(sigma_omega))
        throw std::invalid_argument("detuning spread must be non-negative");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (!(t_end >= dt) || !std::isfinite(t_end))
        throw std::invalid_argument("t_end must be at least one step");
    if (noise_amplitude > 0.0 && integrator != IntegratorKind::kEulerMaruyama)
        throw std::invalid_argument("noise requires the euler-maruyama integrator");
    if (sample_stride < 1) throw std::invalid_argument("sample stride must be positive");
}

RhsParams rhs_params_at(const SimConfig& cfg, double t) {
    RhsParams p;
    p.coupling_scale = cfg.coupling_gain.value(t);
    p.shil_gain = cfg.shil_gain.value(t);
    p.shil_phase = cfg.shil_phase_offset - cfg.shil_detuning * t;
    p.harmonic = cfg.shil_harmonic;
    p.waveform = cfg.shil_waveform;
    p.pulse_duty = cfg.pulse_duty;
    return p;
}

double waveform_value(Waveform w, double pulse_duty, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("waveform argument must be finite");
    switch (w) {
        case Waveform::kSinusoidal:
            return std::sin(x);
        case Waveform::kRectangular: {
            const double f = unit_fraction(x);
            if (f == 0.0 || f == 0.5) return 0.0;
            return f < 0.5 ? 1.0 : -1.0;
        }
        case Waveform::kPulse: {
            if (!(pulse_duty > 0.0) || !(pulse_duty < 1.0))
                throw std::invalid_argument("pulse duty must lie in (0, 1)");
            const double f = unit_fraction(x);
            return f < pulse_duty ? 1.0 : -pulse_duty / (1.0 - pulse_duty);
        }
    }
    throw std::invalid_argument("unknown waveform");
}

void phase_rhs(std::span<const double> theta, const CouplingMatrix& j,
               std::span<const double> delta_omega, const RhsParams& p,
               std::span<double> dtheta) {
    const int n = j.n;
    if (static_cast<int>(theta.size()) != n || static_cast<int>(delta_omega.size()) != n ||
        static_cast<int>(dtheta.size()) != n)
        throw std::invalid_argument("dimension mismatch");
    if (p.harmonic < 1) throw std::invalid_argument("harmonic must be positive");
    rhs_core(theta, j, delta_omega, p, dtheta, scratch_for(n));
}

std::vector<double> phase_rhs(std::span<const double> theta, const CouplingMatrix& j,
                              std::span<const double> delta_omega, const RhsParams& p) {
    std::vector<double> dtheta(theta.size());
    phase_rhs(theta, j, delta_omega, p, dtheta);
    return dtheta;
}

void step_rk4(OscillatorState& state, const CouplingMatrix& j, const NaturalFrequencies& freqs,
              const SimConfig& cfg) {
    if (cfg.noise_amplitude != 0.0)
        throw std::invalid_argument("rk4 stepping requires zero noise amplitude");
    require_dimensions(state, j, freqs);
    const int n = j.n;
    auto& s = scratch_for(n);
    const double dt = cfg.dt;
    const double t = state.t;
    const std::span<const double> dw(freqs.delta_omega);

    rhs_core(state.theta, j, dw, rhs_params_at(cfg, t), s.k1, s);
    for (int i = 0; i < n; ++i) s.stage[i] = state.theta[i] + 0.5 * dt * s.k1[i];
    const RhsParams mid = rhs_params_at(cfg, t + 0.5 * dt);
    rhs_core(s.stage, j, dw, mid, s.k2, s);
    for (int i = 0; i < n; ++i) s.stage[i] = state.theta[i] + 0.5 * dt * s.k2[i];
    rhs_core(s.stage, j, dw, mid, s.k3, s);
    for (int i = 0; i < n; ++i) s.stage[i] = state.theta[i] + dt * s.k3[i];
    rhs_core(s.stage, j, dw, rhs_params_at(cfg, t + dt), s.k4, s);

    for (int i = 0; i < n; ++i)
        state.theta[i] += dt * ((s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]) / 6.0);
    if (cfg.wrap_phases)
        for (double& th : state.theta) th = wrap_phase(th);
    state.t = t + dt;
}

void step_euler_maruyama(OscillatorState& state, const CouplingMatrix& j,
                         const NaturalFrequencies& freqs, const SimConfig& cfg,
                         std::mt19937_64& rng) {
    require_dimensions(state, j, freqs);
    const int n = j.n;
    auto& s = scratch_for(n);
    rhs_core(state.theta, j, freqs.delta_omega, rhs_params_at(cfg, state.t), s.rhs, s);
    for (int i = 0; i < n; ++i) state.theta[i] += cfg.dt * s.rhs[i];
    if (cfg.noise_amplitude > 0.0) {
        const double amp = std::sqrt(2.0 * cfg.noise_amplitude * cfg.dt);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int i = 0; i < n; ++i) state.theta[i] += amp * normal(rng);
    }
    if (cfg.wrap_phases)
        for (double& th : state.theta) th = wrap_phase(th);
    state.t += cfg.dt;
}

std::string Trajectory::to_csv() const {
    const std::size_t n = phases.empty() ? 0 : phases.front().size();
    std::string out = "t";
    for (std::size_t i = 0; i < n; ++i) out += ",theta_" + std::to_string(i);
    out += ",r,psi";
    if (has_lyapunov) out += ",V";
    out += '\n';

    char buf[64];
    auto append = [&](double v) {
        const int len = std::snprintf(buf, sizeof buf, "%.12g", v);
        out.append(buf, static_cast<std::size_t>(len));
    };
    for (std::size_t s = 0; s < times.size(); ++s) {
        append(times[s]);
        for (double th : phases[s]) {
            out += ',';
            append(th);
        }
        out += ',';
        append(order_r[s]);
        out += ',';
        append(order_psi[s]);
        if (has_lyapunov) {
            out += ',';
            append(lyapunov[s]);
        }
        out += '\n';
    }
    return out;
}

Trajectory integrate(const CouplingMatrix& j, const NaturalFrequencies& freqs,
                     const SimConfig& cfg, std::span<const double> theta0,
                     std::mt19937_64* rng) {
    cfg.validate();
    const int n = j.n;
    if (n < 1) throw std::invalid_argument("need at least one oscillator");
    if (static_cast<int>(theta0.size()) != n)
        throw std::invalid_argument("initial phase vector length does not match matrix dimension");
    if (static_cast<int>(freqs.delta_omega.size()) != n)
        throw std::invalid_argument("detuning vector length does not match matrix dimension");
    for (double th : theta0)
        if (!std::isfinite(th)) throw std::invalid_argument("initial phases must be finite");

    OscillatorState state;
    state.theta.assign(theta0.begin(), theta0.end());
    if (cfg.wrap_phases)
        for (double& th : state.theta) th = wrap_phase(th);

    std::mt19937_64 fallback(cfg.seed);
    std::mt19937_64* noise_rng = rng ? rng : &fallback;

    // The horizon rounds up to a whole number of fixed steps.
    long nsteps = std::llround(cfg.t_end / cfg.dt);
    if (nsteps < 1) nsteps = 1;
    if (static_cast<double>(nsteps) * cfg.dt < cfg.t_end * (1.0 - 1e-12)) ++nsteps;

    Trajectory traj;
    traj.has_lyapunov = cfg.shil_waveform == Waveform::kSinusoidal;

    auto lock_metric = [&]() {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            const double rel = state.theta[i] - state.theta[0];
            worst = std::max(worst,
                             std::fabs(wrap_to_pi(cfg.shil_harmonic * rel)) / cfg.shil_harmonic);
        }
        return worst;
    };

    auto record = [&]() {
        traj.times.push_back(state.t);
        traj.phases.push_back(state.theta);
        const OrderParameter op = order_parameter(state.theta);
        traj.order_r.push_back(op.r);
        traj.order_psi.push_back(op.psi);
        if (traj.has_lyapunov) {
            const RhsParams p = rhs_params_at(cfg, state.t);
            traj.lyapunov.push_back(lyapunov_value(state.theta, j, p.shil_gain, p.harmonic,
                                                   p.shil_phase, p.coupling_scale));
        }
    };

    std::vector<double> window;
    record();
    for (long k = 1; k <= nsteps; ++k) {
        if (cfg.integrator == IntegratorKind::kRk4)
            step_rk4(state, j, freqs, cfg);
        else
            step_euler_maruyama(state, j, freqs, cfg, *noise_rng);
        if (k % cfg.sample_stride == 0 || k == nsteps) {
            record();
            if (cfg.early_stop) {
                window.push_back(lock_metric());
                if (window.size() > 10) window.erase(window.begin());
                if (window.size() == 10 &&
                    *std::max_element(window.begin(), window.end()) -
                            *std::min_element(window.begin(), window.end()) <
                        1e-4)
                    break;
            }
        }
    }
    return traj;
}

std::vector<double> random_initial_phases(int n, std::mt19937_64& rng) {
    if (n < 1) throw std::invalid_argument("need at least one oscillator");
    std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
    std::vector<double> theta(n);
    for (double& t : theta) t = uniform(rng);
    return theta;
}

double lyapunov_value(std::span<const double> theta, const CouplingMatrix& j, double shil_gain,
                      int harmonic, double phase_offset, double coupling_scale) {
    if (static_cast<int>(theta.size()) != j.n)
        throw std::invalid_argument("phase vector length does not match matrix dimension");
    if (harmonic < 1) throw std::invalid_argument("harmonic must be positive");
    double v = 0.0;
    for (int a = 0; a < j.n; ++a)
        for (int b = 0; b < j.n; ++b)
            if (a != b) v -= 0.5 * coupling_scale * j(a, b) * std::cos(theta[a] - theta[b]);
    if (shil_gain != 0.0)
        for (double th : theta)
            v -= shil_gain / harmonic * std::cos(harmonic * th + phase_offset);
    return v;
}

}  // namespace oim
