#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "oim/dynamics.hpp"
#include "oim/graph.hpp"
#include "oim/readout.hpp"

using namespace oim;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

CouplingMatrix zero_coupling(int n) { return to_coupling(make_graph(n, {}), 1.0); }

ProblemGraph random_weighted_graph(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> weight(-1.5, 1.5);
    std::bernoulli_distribution keep(0.6);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (keep(rng)) edges.push_back({i, j, weight(rng)});
    return make_graph(n, std::move(edges));
}

// Direct translation of the model equation, used as the oracle for the
// factored production right-hand side.
std::vector<double> naive_rhs(const std::vector<double>& theta, const CouplingMatrix& j,
                              const std::vector<double>& dw, const RhsParams& p) {
    const int n = j.n;
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int k = 0; k < n; ++k) sum += j(i, k) * std::sin(theta[k] - theta[i]);
        out[i] = dw[i] + p.coupling_scale * sum -
                 p.shil_gain * waveform_value(p.waveform, p.pulse_duty,
                                              p.harmonic * theta[i] + p.shil_phase);
    }
    return out;
}

}  // namespace

TEST_CASE("schedules evaluate constants and clamped ramps") {
    const Schedule c = Schedule::constant(2.0);
    CHECK(c.value(-5.0) == 2.0);
    CHECK(c.value(100.0) == 2.0);
    CHECK(c.is_constant());

    const Schedule r = Schedule::linear_ramp(0.0, 1.0, 10.0);
    CHECK(r.value(-1.0) == 0.0);
    CHECK(r.value(0.0) == 0.0);
    CHECK(r.value(5.0) == Approx(0.5));
    CHECK(r.value(10.0) == 1.0);
    CHECK(r.value(1e6) == 1.0);
    CHECK_FALSE(r.is_constant());

    CHECK(Schedule::linear_ramp(0.0, 1.0, 0.0).value(0.0) == 1.0);
    CHECK(Schedule::linear_ramp(3.0, 3.0, 5.0).is_constant());
    CHECK_THROWS_AS(Schedule::linear_ramp(0.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("waveforms take their defining values") {
    CHECK(waveform_value(Waveform::kSinusoidal, 0.1, 1.3) == std::sin(1.3));

    CHECK(waveform_value(Waveform::kRectangular, 0.1, 0.0) == 0.0);
    CHECK(waveform_value(Waveform::kRectangular, 0.1, 0.1) == 1.0);
    CHECK(waveform_value(Waveform::kRectangular, 0.1, kPi - 0.1) == 1.0);
    CHECK(waveform_value(Waveform::kRectangular, 0.1, kPi + 0.1) == -1.0);
    CHECK(waveform_value(Waveform::kRectangular, 0.1, -0.1) == -1.0);
    CHECK(waveform_value(Waveform::kRectangular, 0.1, 2 * kPi + 0.1) == 1.0);

    const double low = -0.1 / 0.9;
    CHECK(waveform_value(Waveform::kPulse, 0.1, 0.0) == 1.0);
    CHECK(waveform_value(Waveform::kPulse, 0.1, 2 * kPi * 0.05) == 1.0);
    CHECK(waveform_value(Waveform::kPulse, 0.1, 2 * kPi * 0.15) == low);
    CHECK(waveform_value(Waveform::kPulse, 0.1, kPi) == low);
    // Zero mean over one period: duty * 1 + (1 - duty) * low == 0.
    CHECK(0.1 * 1.0 + 0.9 * low == Approx(0.0).epsilon(1e-15));

    CHECK_THROWS_AS(waveform_value(Waveform::kPulse, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(waveform_value(Waveform::kSinusoidal, 0.1, std::nan("")),
                    std::invalid_argument);
}

TEST_CASE("rhs_params_at tracks schedules and the injected phase") {
    SimConfig cfg;
    cfg.coupling_gain = Schedule::linear_ramp(0.0, 0.4, 8.0);
    cfg.shil_gain = Schedule::constant(0.7);
    cfg.shil_phase_offset = 0.2;
    cfg.shil_detuning = 0.3;
    const RhsParams p = rhs_params_at(cfg, 2.0);
    CHECK(p.coupling_scale == Approx(0.1));
    CHECK(p.shil_gain == 0.7);
    CHECK(p.shil_phase == Approx(0.2 - 0.6));
    CHECK(p.harmonic == cfg.shil_harmonic);
}

TEST_CASE("phase_rhs matches a hand-computed pair") {
    const CouplingMatrix j = to_coupling(make_graph(2, {{0, 1}}), 1.0);  // J01 = -1
    RhsParams p;
    p.coupling_scale = 1.0;
    p.shil_gain = 0.0;
    const std::vector<double> theta{0.0, kPi / 2};
    const std::vector<double> dw{0.0, 0.0};
    const auto d = phase_rhs(theta, j, dw, p);
    CHECK(d[0] == Approx(-1.0));
    CHECK(d[1] == Approx(1.0));
}

TEST_CASE("phase_rhs applies the injection term") {
    const CouplingMatrix j = zero_coupling(1);
    RhsParams p;
    p.shil_gain = 0.5;
    p.harmonic = 2;
    p.waveform = Waveform::kSinusoidal;
    const auto d = phase_rhs(std::vector<double>{0.7}, j, std::vector<double>{0.0}, p);
    CHECK(d[0] == Approx(-0.5 * std::sin(1.4)));
}

TEST_CASE("phase_rhs agrees with the direct pairwise formula") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 2 * kPi);
    std::uniform_real_distribution<double> dwdist(-0.1, 0.1);
    for (Waveform w : {Waveform::kSinusoidal, Waveform::kRectangular, Waveform::kPulse}) {
        for (int harmonic : {2, 3}) {
            const ProblemGraph g = random_weighted_graph(7, rng);
            const CouplingMatrix j = to_coupling(g, 0.8);
            std::vector<double> theta(7), dw(7);
            for (double& t : theta) t = u(rng);
            for (double& d : dw) d = dwdist(rng);
            RhsParams p;
            p.coupling_scale = 0.35;
            p.shil_gain = 0.6;
            p.shil_phase = 0.4;
            p.harmonic = harmonic;
            p.waveform = w;
            const auto got = phase_rhs(theta, j, dw, p);
            const auto want = naive_rhs(theta, j, dw, p);
            for (int i = 0; i < 7; ++i) CHECK(got[i] == Approx(want[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("phase_rhs validates dimensions") {
    const CouplingMatrix j = zero_coupling(2);
    std::vector<double> out(2);
    CHECK_THROWS_AS(
        phase_rhs(std::vector<double>{0.0}, j, std::vector<double>{0.0, 0.0}, RhsParams{}, out),
        std::invalid_argument);
}

TEST_CASE("rk4 advances a constant derivative exactly") {
    // Power-of-two detunings make the stage average exact in floating point.
    OscillatorState state{{1.0, 2.0}, 0.0};
    NaturalFrequencies freqs{{0.25, -0.5}};
    SimConfig cfg;
    cfg.shil_gain = Schedule::constant(0.0);
    cfg.dt = 0.01;
    step_rk4(state, zero_coupling(2), freqs, cfg);
    CHECK(state.theta[0] == 1.0 + 0.01 * 0.25);
    CHECK(state.theta[1] == 2.0 - 0.01 * 0.5);
    CHECK(state.t == 0.01);
}

TEST_CASE("rk4 refuses a noisy configuration") {
    OscillatorState state{{0.0}, 0.0};
    SimConfig cfg;
    cfg.noise_amplitude = 0.1;
    cfg.integrator = IntegratorKind::kEulerMaruyama;
    CHECK_THROWS_AS(step_rk4(state, zero_coupling(1), NaturalFrequencies::zero(1), cfg),
                    std::invalid_argument);
}

TEST_CASE("noiseless euler-maruyama is plain euler and leaves the rng alone") {
    const CouplingMatrix j = to_coupling(make_graph(2, {{0, 1}}), 1.0);
    NaturalFrequencies freqs{{0.1, -0.1}};
    SimConfig cfg;
    cfg.coupling_gain = Schedule::constant(1.0);
    cfg.shil_gain = Schedule::constant(0.0);
    cfg.integrator = IntegratorKind::kEulerMaruyama;
    cfg.dt = 0.02;
    cfg.wrap_phases = false;

    OscillatorState state{{0.3, 1.1}, 0.0};
    RhsParams p = rhs_params_at(cfg, 0.0);
    const auto d = phase_rhs(state.theta, j, freqs.delta_omega, p);

    std::mt19937_64 rng(5), probe(5);
    step_euler_maruyama(state, j, freqs, cfg, rng);
    CHECK(state.theta[0] == 0.3 + 0.02 * d[0]);
    CHECK(state.theta[1] == 1.1 + 0.02 * d[1]);
    CHECK(rng() == probe());
}

TEST_CASE("euler-maruyama noise has the diffusive variance") {
    SimConfig cfg;
    cfg.shil_gain = Schedule::constant(0.0);
    cfg.integrator = IntegratorKind::kEulerMaruyama;
    cfg.noise_amplitude = 0.5;
    cfg.dt = 0.01;
    cfg.wrap_phases = false;
    const CouplingMatrix j = zero_coupling(1);
    const NaturalFrequencies freqs = NaturalFrequencies::zero(1);

    std::mt19937_64 rng(77);
    double sum = 0.0, sumsq = 0.0;
    const int reps = 4000;
    for (int k = 0; k < reps; ++k) {
        OscillatorState state{{0.0}, 0.0};
        step_euler_maruyama(state, j, freqs, cfg, rng);
        sum += state.theta[0];
        sumsq += state.theta[0] * state.theta[0];
    }
    const double mean = sum / reps;
    const double var = sumsq / reps - mean * mean;
    CHECK(var == Approx(2.0 * cfg.noise_amplitude * cfg.dt).epsilon(0.1));
}

TEST_CASE("integrate records the expected sample grid") {
    SimConfig cfg;
    cfg.t_end = 1.0;
    cfg.dt = 0.01;
    cfg.sample_stride = 10;
    const Trajectory traj = integrate(zero_coupling(2), NaturalFrequencies::zero(2), cfg,
                                      std::vector<double>{0.0, 1.0});
    CHECK(traj.samples() == 11);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == Approx(1.0));
    CHECK(traj.phases.size() == traj.samples());
    CHECK(traj.order_r.size() == traj.samples());

    // A horizon that is not a whole number of steps rounds up.
    cfg.t_end = 0.094;
    cfg.sample_stride = 1;
    const Trajectory odd = integrate(zero_coupling(2), NaturalFrequencies::zero(2), cfg,
                                     std::vector<double>{0.0, 1.0});
    CHECK(odd.times.back() >= cfg.t_end);
}

TEST_CASE("integrate is deterministic for a fixed seed") {
    const CouplingMatrix j = to_coupling(named_graph("triangle"), 1.0);
    SimConfig cfg;
    cfg.t_end = 5.0;
    cfg.noise_amplitude = 0.2;
    cfg.integrator = IntegratorKind::kEulerMaruyama;
    cfg.seed = 42;
    const std::vector<double> theta0{0.1, 2.0, 4.0};
    const Trajectory a = integrate(j, NaturalFrequencies::zero(3), cfg, theta0);
    const Trajectory b = integrate(j, NaturalFrequencies::zero(3), cfg, theta0);
    CHECK(a.times == b.times);
    CHECK(a.phases == b.phases);
}

TEST_CASE("an antiferromagnetic pair relaxes to antiphase") {
    const CouplingMatrix j = to_coupling(named_graph("path(2)"), 1.0);
    SimConfig cfg;
    cfg.shil_gain = Schedule::constant(0.0);  // plain repulsive coupling
    cfg.t_end = 100.0;
    const std::vector<double> theta0{0.1, 0.3};
    const Trajectory traj = integrate(j, NaturalFrequencies::zero(2), cfg, theta0);
    const auto& last = traj.phases.back();
    CHECK(angular_distance(last[1], last[0]) == Approx(kPi).epsilon(0.01));
    CHECK(traj.order_r.back() < 0.05);
}

TEST_CASE("wrapped and unwrapped integration agree modulo a turn") {
    const CouplingMatrix j = to_coupling(named_graph("triangle"), 1.0);
    NaturalFrequencies freqs{{0.05, -0.02, 0.01}};
    SimConfig cfg;
    cfg.t_end = 5.0;
    const std::vector<double> theta0{0.5, 2.5, 5.0};
    Trajectory wrapped, open;
    {
        SimConfig c2 = cfg;
        c2.wrap_phases = true;
        wrapped = integrate(j, freqs, c2, theta0);
    }
    {
        SimConfig c2 = cfg;
        c2.wrap_phases = false;
        open = integrate(j, freqs, c2, theta0);
    }
    REQUIRE(wrapped.samples() == open.samples());
    const auto& a = wrapped.phases.back();
    const auto& b = open.phases.back();
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(angular_distance(a[i], b[i]) < 1e-9);
}

TEST_CASE("injection locks lone oscillators onto the harmonic grid") {
    SimConfig cfg;
    cfg.coupling_gain = Schedule::constant(0.0);
    cfg.shil_gain = Schedule::constant(0.5);
    cfg.t_end = 120.0;
    const CouplingMatrix j = zero_coupling(1);
    const NaturalFrequencies freqs = NaturalFrequencies::zero(1);

    std::mt19937_64 rng(9);
    for (Waveform w : {Waveform::kSinusoidal, Waveform::kRectangular, Waveform::kPulse}) {
        cfg.shil_waveform = w;
        for (int k = 0; k < 12; ++k) {
            const auto theta0 = random_initial_phases(1, rng);
            const Trajectory traj = integrate(j, freqs, cfg, theta0);
            const double final_theta = traj.phases.back()[0];
            const double lock_dist = std::fabs(wrap_to_pi(2.0 * final_theta)) / 2.0;
            CHECK(lock_dist < 0.05);
        }
    }
}

TEST_CASE("the third harmonic locks onto three levels") {
    SimConfig cfg;
    cfg.coupling_gain = Schedule::constant(0.0);
    cfg.shil_gain = Schedule::constant(0.5);
    cfg.shil_harmonic = 3;
    cfg.shil_waveform = Waveform::kSinusoidal;
    cfg.t_end = 120.0;

    std::mt19937_64 rng(10);
    for (int k = 0; k < 12; ++k) {
        const auto theta0 = random_initial_phases(1, rng);
        const Trajectory traj =
            integrate(zero_coupling(1), NaturalFrequencies::zero(1), cfg, theta0);
        const double final_theta = traj.phases.back()[0];
        CHECK(std::fabs(wrap_to_pi(3.0 * final_theta)) / 3.0 < 0.05);
    }
}

TEST_CASE("lyapunov_value reproduces hand-computed potentials") {
    const CouplingMatrix j = to_coupling(make_graph(2, {{0, 1}}), 1.0);  // J01 = -1
    CHECK(lyapunov_value(std::vector<double>{0.0, kPi}, j, 0.0, 2) == Approx(-1.0));
    CHECK(lyapunov_value(std::vector<double>{0.0, 0.0}, j, 0.0, 2) == Approx(1.0));
    // Injection adds -(Ks/h) sum cos(h theta).
    CHECK(lyapunov_value(std::vector<double>{0.0, kPi}, j, 0.5, 2) == Approx(-1.5));
}

TEST_CASE("lyapunov_value ignores a global phase shift without injection") {
    std::mt19937_64 rng(13);
    const CouplingMatrix j = to_coupling(random_weighted_graph(6, rng), 1.0);
    auto theta = random_initial_phases(6, rng);
    const double base = lyapunov_value(theta, j, 0.0, 2);
    for (double& t : theta) t += 1.234;
    CHECK(lyapunov_value(theta, j, 0.0, 2) == Approx(base).epsilon(1e-12));
}

TEST_CASE("the sinusoidal flow is the negative potential gradient") {
    std::mt19937_64 rng(29);
    const CouplingMatrix j = to_coupling(random_weighted_graph(6, rng), 0.9);
    RhsParams p;
    p.coupling_scale = 0.7;
    p.shil_gain = 0.4;
    p.shil_phase = 0.3;
    p.harmonic = 2;
    p.waveform = Waveform::kSinusoidal;
    const std::vector<double> dw(6, 0.0);

    for (int round = 0; round < 10; ++round) {
        auto theta = random_initial_phases(6, rng);
        const auto rhs = phase_rhs(theta, j, dw, p);
        for (int i = 0; i < 6; ++i) {
            const double eps = 1e-6;
            auto hi = theta, lo = theta;
            hi[i] += eps;
            lo[i] -= eps;
            const double grad =
                (lyapunov_value(hi, j, p.shil_gain, 2, p.shil_phase, p.coupling_scale) -
                 lyapunov_value(lo, j, p.shil_gain, 2, p.shil_phase, p.coupling_scale)) /
                (2 * eps);
            CHECK(rhs[i] == Approx(-grad).epsilon(1e-5));
        }
    }
}

TEST_CASE("the potential decreases along sinusoidal trajectories") {
    std::mt19937_64 rng(37);
    SimConfig cfg;
    cfg.coupling_gain = Schedule::constant(0.2);
    cfg.shil_gain = Schedule::constant(0.5);
    cfg.shil_waveform = Waveform::kSinusoidal;
    cfg.t_end = 30.0;

    const CouplingMatrix j = to_coupling(named_graph("house"), 1.0);
    const Trajectory traj =
        integrate(j, NaturalFrequencies::zero(5), cfg, random_initial_phases(5, rng));
    REQUIRE(traj.has_lyapunov);
    REQUIRE(traj.lyapunov.size() == traj.samples());
    for (std::size_t s = 1; s < traj.lyapunov.size(); ++s)
        CHECK(traj.lyapunov[s] <= traj.lyapunov[s - 1] + 1e-8);

    cfg.t_end = 10.0;
    for (int round = 0; round < 3; ++round) {
        const CouplingMatrix jr = to_coupling(random_weighted_graph(6, rng), 1.0);
        const Trajectory t2 =
            integrate(jr, NaturalFrequencies::zero(6), cfg, random_initial_phases(6, rng));
        for (std::size_t s = 1; s < t2.lyapunov.size(); ++s)
            CHECK(t2.lyapunov[s] <= t2.lyapunov[s - 1] + 1e-8);
    }
}

TEST_CASE("non-sinusoidal runs skip the potential column") {
    SimConfig cfg;
    cfg.t_end = 1.0;
    const Trajectory traj = integrate(zero_coupling(2), NaturalFrequencies::zero(2), cfg,
                                      std::vector<double>{0.0, 1.0});
    CHECK_FALSE(traj.has_lyapunov);
    CHECK(traj.lyapunov.empty());
    CHECK(traj.to_csv().substr(0, traj.to_csv().find('\n')) == "t,theta_0,theta_1,r,psi");
}

TEST_CASE("trajectory CSV has one header and one line per sample") {
    SimConfig cfg;
    cfg.t_end = 2.0;
    cfg.shil_waveform = Waveform::kSinusoidal;
    const Trajectory traj = integrate(to_coupling(named_graph("triangle"), 1.0),
                                      NaturalFrequencies::zero(3), cfg,
                                      std::vector<double>{0.1, 2.0, 4.0});
    const std::string csv = traj.to_csv();
    CHECK(csv.substr(0, csv.find('\n')) == "t,theta_0,theta_1,theta_2,r,psi,V");
    std::size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == traj.samples() + 1);
}

TEST_CASE("early stopping truncates a settled run") {
    SimConfig cfg;
    cfg.coupling_gain = Schedule::constant(0.0);
    cfg.shil_gain = Schedule::constant(0.5);
    cfg.t_end = 50.0;
    cfg.early_stop = true;
    const Trajectory traj = integrate(zero_coupling(1), NaturalFrequencies::zero(1), cfg,
                                      std::vector<double>{0.0});
    CHECK(traj.times.back() < 5.0);

    cfg.early_stop = false;
    const Trajectory full = integrate(zero_coupling(1), NaturalFrequencies::zero(1), cfg,
                                      std::vector<double>{0.0});
    CHECK(full.times.back() == Approx(50.0));
}

TEST_CASE("random_initial_phases is seeded and lands in range") {
    std::mt19937_64 a(3), b(3);
    const auto pa = random_initial_phases(64, a);
    CHECK(pa == random_initial_phases(64, b));
    for (double t : pa) {
        CHECK(t >= 0.0);
        CHECK(t < 2 * kPi);
    }
    // Both half-turns get hit with 64 draws.
    int low = 0;
    for (double t : pa)
        if (t < kPi) ++low;
    CHECK(low > 10);
    CHECK(low < 54);
}

TEST_CASE("validate rejects inconsistent configurations") {
    SimConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    SimConfig bad = cfg;
    bad.dt = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.t_end = 0.001;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.shil_harmonic = 4;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.noise_amplitude = 0.1;  // still on rk4
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.pulse_duty = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.sample_stride = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.coupling_gain = Schedule{Schedule::Kind::kConstant, -0.1, -0.1, 0.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
