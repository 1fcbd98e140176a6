#include "oim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace oim {

namespace {

// Lock-distance threshold used for settle-time detection; matches the
// band the binarization checks use for "close enough to a lock state".
constexpr double kSettleTolerance = 0.15;

// Per-isomorph master seeds are decorrelated with a golden-ratio stride;
// index 0 keeps the caller's seed unchanged.
constexpr std::uint64_t kSeedStride = 0x9e3779b97f4a7c15ull;

double lock_distance(double relative_phase, int harmonic) {
    return std::fabs(wrap_to_pi(harmonic * relative_phase)) / harmonic;
}

// Earliest recorded time from which every later sample keeps all
// oscillators within the settle tolerance of a lock state.
double settle_time_of(const Trajectory& traj, int harmonic) {
    if (traj.times.empty()) return 0.0;
    std::size_t first_settled = traj.times.size();
    for (std::size_t s = traj.times.size(); s-- > 0;) {
        const std::vector<double>& theta = traj.phases[s];
        double worst = 0.0;
        for (double th : theta) worst = std::max(worst, lock_distance(th - theta[0], harmonic));
        if (worst <= kSettleTolerance)
            first_settled = s;
        else
            break;
    }
    if (first_settled == traj.times.size()) return traj.times.back();
    return traj.times[first_settled];
}

void check_options(const HarnessOptions& opts) {
    if (opts.weight_bits < 0 || opts.weight_bits > 16)
        throw std::invalid_argument("weight bits must lie in [0, 16]");
    if (!(opts.spin_tolerance > 0.0) || !(opts.spin_tolerance < std::numbers::pi / 2.0))
        throw std::invalid_argument("spin tolerance must lie in (0, pi/2)");
}

int resolve_threads(int requested, int trials) {
    int threads = requested;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    return std::min(threads, trials);
}

std::string format_stat(double v) {
    char buf[64];
    const int len = std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

}  // namespace

TrialRecord run_protocol(const ProblemGraph& g, const SimConfig& cfg, std::uint64_t trial_seed,
                         const HarnessOptions& opts) {
    cfg.validate();
    check_options(opts);
    if (cfg.shil_harmonic != 2)
        throw std::invalid_argument("max-cut readout requires the binarizing harmonic (2)");

    std::mt19937_64 rng(trial_seed);
    const NaturalFrequencies freqs = NaturalFrequencies::draw(g.n, cfg.sigma_omega, rng);
    const std::vector<double> theta0 = random_initial_phases(g.n, rng);

    CouplingMatrix j = to_coupling(g, 1.0);
    if (opts.weight_bits > 0) j = quantize_weights(j, opts.weight_bits);

    Trajectory traj = integrate(j, freqs, cfg, theta0, &rng);

    TrialRecord rec;
    rec.seed = trial_seed;
    rec.final_phases = traj.phases.back();
    rec.spins = binarize(rec.final_phases, 0, opts.spin_tolerance);
    rec.cut_value = cut_value(rec.spins.spins, g);
    // Energy of the weights the run actually used (quantized when enabled).
    rec.ising_energy = ising_energy(rec.spins.spins, j, 0.0);
    rec.unresolved = !rec.spins.unresolved.empty();
    rec.settle_time = settle_time_of(traj, cfg.shil_harmonic);
    if (opts.keep_trajectories) rec.trajectory = std::move(traj);
    return rec;
}

SuccessStats aggregate_stats(const std::vector<TrialRecord>& records, const CutSolution& oracle,
                             const HarnessOptions& opts) {
    SuccessStats stats;
    stats.trials = static_cast<int>(records.size());
    stats.oracle_cut = oracle.cut_value;
    if (records.empty()) return stats;

    int successes = 0, unresolved = 0;
    double cut_sum = 0.0, settle_sum = 0.0;
    for (const TrialRecord& rec : records) {
        const bool optimal = rec.cut_value >= oracle.cut_value - 1e-9;
        const bool rejected = opts.policy == UnresolvedPolicy::kCountAsFailure && rec.unresolved;
        if (optimal && !rejected) {
            ++successes;
            ++stats.optimal_bitstrings[rec.spins.bitstring()];
        }
        if (rec.unresolved) ++unresolved;
        cut_sum += rec.cut_value;
        settle_sum += rec.settle_time;
        ++stats.cut_histogram[rec.cut_value];
    }

    const double trials = static_cast<double>(stats.trials);
    stats.success_rate = successes / trials;
    stats.unresolved_rate = unresolved / trials;
    stats.mean_settle_time = settle_sum / trials;
    stats.mean_cut = cut_sum / trials;
    stats.approx_ratio = oracle.cut_value != 0.0 ? stats.mean_cut / oracle.cut_value : 1.0;
    return stats;
}

SuccessStats run_trials_collect(const ProblemGraph& g, const SimConfig& cfg, int trials,
                                std::uint64_t master_seed, const HarnessOptions& opts,
                                std::vector<TrialRecord>& records_out) {
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    check_options(opts);
    const CutSolution oracle = brute_force_maxcut(g);

    records_out.assign(trials, TrialRecord{});
    const int threads = resolve_threads(opts.threads, trials);
    if (threads == 1) {
        for (int i = 0; i < trials; ++i)
            records_out[i] = run_protocol(g, cfg, master_seed ^ static_cast<std::uint64_t>(i), opts);
    } else {
        // Records land in pre-sized slots keyed by trial index, so the
        // aggregate cannot depend on scheduling order.
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&]() {
            try {
                for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1))
                    records_out[i] =
                        run_protocol(g, cfg, master_seed ^ static_cast<std::uint64_t>(i), opts);
            } catch (...) {
                std::scoped_lock lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }
    return aggregate_stats(records_out, oracle, opts);
}

SuccessStats run_trials(const ProblemGraph& g, const SimConfig& cfg, int trials,
                        std::uint64_t master_seed, const HarnessOptions& opts) {
    std::vector<TrialRecord> records;
    return run_trials_collect(g, cfg, trials, master_seed, opts, records);
}

std::vector<std::pair<double, SuccessStats>> sweep_coupling(const ProblemGraph& g,
                                                            const SimConfig& cfg,
                                                            const std::vector<double>& c_values,
                                                            int trials, std::uint64_t master_seed,
                                                            const HarnessOptions& opts) {
    if (c_values.empty()) throw std::invalid_argument("need at least one coupling value");
    std::vector<std::pair<double, SuccessStats>> rows;
    rows.reserve(c_values.size());
    for (double c : c_values) {
        if (!(c > 0.0) || !std::isfinite(c))
            throw std::invalid_argument("coupling values must be positive");
        SimConfig swept = cfg;
        swept.coupling_gain = Schedule::constant(c);
        rows.emplace_back(c, run_trials(g, swept, trials, master_seed, opts));
    }
    return rows;
}

AblationResult shil_ablation(const ProblemGraph& g, const SimConfig& cfg, int trials,
                             std::uint64_t master_seed, const HarnessOptions& opts) {
    SimConfig off = cfg;
    off.shil_gain = Schedule::constant(0.0);
    AblationResult result;
    result.with_shil = run_trials(g, cfg, trials, master_seed, opts);
    result.without_shil = run_trials(g, off, trials, master_seed, opts);
    return result;
}

IsomorphResult isomorph_battery(const ProblemGraph& base,
                                const std::vector<std::vector<int>>& perms, const SimConfig& cfg,
                                int trials, std::uint64_t master_seed,
                                const HarnessOptions& opts) {
    if (perms.empty()) throw std::invalid_argument("need at least one permutation");
    IsomorphResult result;
    result.permutations = perms;
    result.stats.reserve(perms.size());
    for (std::size_t k = 0; k < perms.size(); ++k) {
        const ProblemGraph iso = permute(base, perms[k]);
        result.stats.push_back(
            run_trials(iso, cfg, trials, master_seed ^ (k * kSeedStride), opts));
    }
    result.oracle_cut = result.stats.front().oracle_cut;
    result.oracle_consistent = true;
    for (const SuccessStats& s : result.stats)
        if (s.oracle_cut != result.oracle_cut) result.oracle_consistent = false;
    return result;
}

IsomorphResult isomorph_battery(const ProblemGraph& base, int permutations, const SimConfig& cfg,
                                int trials, std::uint64_t master_seed,
                                const HarnessOptions& opts) {
    if (permutations < 1) throw std::invalid_argument("need at least one permutation");
    std::mt19937_64 perm_rng(master_seed);
    std::vector<std::vector<int>> perms;
    perms.reserve(permutations);
    for (int k = 0; k < permutations; ++k) perms.push_back(random_permutation(base.n, perm_rng));
    return isomorph_battery(base, perms, cfg, trials, master_seed, opts);
}

std::string sweep_to_csv(const std::vector<std::pair<double, SuccessStats>>& rows) {
    std::string out = "c,trials,success_rate,unresolved_rate,mean_settle_time,mean_cut,approx_ratio\n";
    for (const auto& [c, stats] : rows) {
        out += format_stat(c);
        out += ',' + std::to_string(stats.trials);
        out += ',' + format_stat(stats.success_rate);
        out += ',' + format_stat(stats.unresolved_rate);
        out += ',' + format_stat(stats.mean_settle_time);
        out += ',' + format_stat(stats.mean_cut);
        out += ',' + format_stat(stats.approx_ratio);
        out += '\n';
    }
    return out;
}

}  // namespace oim
