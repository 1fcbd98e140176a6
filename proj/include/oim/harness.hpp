#pragma once

// Trial runner: executes the four-step measurement protocol (free-run ->
// set weights -> activate synchronization -> read out phases) over many
// seeded trials and aggregates success statistics against the oracle.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oim/dynamics.hpp"
#include "oim/graph.hpp"
#include "oim/objective.hpp"

namespace oim {

/// What to do with trials that end with unresolved oscillators: count
/// them as failures, or keep them and judge the cut value alone.
enum class UnresolvedPolicy { kCountAsFailure, kKeepWithFlag };

struct HarnessOptions {
    int threads = 1;
    UnresolvedPolicy policy = UnresolvedPolicy::kCountAsFailure;
    double spin_tolerance = 0.3;   // ambiguity band for the readout
    int weight_bits = 0;           // quantize coupling weights; 0 = full resolution
    bool keep_trajectories = false;
};

/// Outcome of one protocol execution.
struct TrialRecord {
    std::uint64_t seed = 0;
    std::vector<double> final_phases;
    SpinAssignment spins;
    double cut_value = 0.0;
    double ising_energy = 0.0;
    bool unresolved = false;
    double settle_time = 0.0;
    std::optional<Trajectory> trajectory;  // kept only on request
};

/// Aggregate over independent trials of one instance.
struct SuccessStats {
    int trials = 0;
    double oracle_cut = 0.0;
    double success_rate = 0.0;             // fraction of trials at the oracle optimum
    double unresolved_rate = 0.0;
    double mean_settle_time = 0.0;
    double mean_cut = 0.0;
    double approx_ratio = 0.0;             // mean_cut / oracle_cut (1 when oracle_cut == 0)
    std::map<double, int> cut_histogram;   // cut value -> trial count
    std::map<std::string, int> optimal_bitstrings;  // distinct optima visited
};

struct AblationResult {
    SuccessStats with_shil;
    SuccessStats without_shil;
};

struct IsomorphResult {
    std::vector<std::vector<int>> permutations;
    std::vector<SuccessStats> stats;
    double oracle_cut = 0.0;      // common optimum of every isomorph
    bool oracle_consistent = false;
};

/// Execute one protocol run: draw detunings and random initial phases
/// from a generator seeded with `trial_seed`, build the coupling matrix,
/// integrate with the schedules starting at t = 0, and binarize the final
/// phases against oscillator 0. Success is judged by the aggregator.
TrialRecord run_protocol(const ProblemGraph& g, const SimConfig& cfg,
                         std::uint64_t trial_seed, const HarnessOptions& opts = {});

/// Fold trial records into statistics against the oracle optimum.
SuccessStats aggregate_stats(const std::vector<TrialRecord>& records,
                             const CutSolution& oracle, const HarnessOptions& opts);

/// Run `trials` independent protocol executions with per-trial seed
/// master_seed XOR trial_index. Deterministic for a given master seed
/// regardless of thread count.
SuccessStats run_trials(const ProblemGraph& g, const SimConfig& cfg, int trials,
                        std::uint64_t master_seed, const HarnessOptions& opts = {});

/// run_trials + per-trial records (for trace dumps and pairing checks).
SuccessStats run_trials_collect(const ProblemGraph& g, const SimConfig& cfg, int trials,
                                std::uint64_t master_seed, const HarnessOptions& opts,
                                std::vector<TrialRecord>& records_out);

/// One run_trials per coupling strength, all with the same master seed.
std::vector<std::pair<double, SuccessStats>> sweep_coupling(
    const ProblemGraph& g, const SimConfig& cfg, const std::vector<double>& c_values,
    int trials, std::uint64_t master_seed, const HarnessOptions& opts = {});

/// Paired comparison on identical per-trial seeds: the configured SHIL
/// schedule versus the injection signal forced off.
AblationResult shil_ablation(const ProblemGraph& g, const SimConfig& cfg, int trials,
                             std::uint64_t master_seed, const HarnessOptions& opts = {});

/// Apply `permutations` seeded random relabelings to `base` and run the
/// trial battery on each, verifying that all oracle optima agree.
IsomorphResult isomorph_battery(const ProblemGraph& base, int permutations,
                                const SimConfig& cfg, int trials,
                                std::uint64_t master_seed, const HarnessOptions& opts = {});

/// Same battery over caller-supplied permutations. Isomorph k runs with
/// master seed master_seed mixed with k; k = 0 uses master_seed itself,
/// so a single identity permutation reproduces run_trials on the base.
IsomorphResult isomorph_battery(const ProblemGraph& base,
                                const std::vector<std::vector<int>>& perms,
                                const SimConfig& cfg, int trials,
                                std::uint64_t master_seed, const HarnessOptions& opts = {});

/// CSV table "c,trials,success_rate,unresolved_rate,mean_settle_time,mean_cut,approx_ratio".
std::string sweep_to_csv(const std::vector<std::pair<double, SuccessStats>>& rows);

}  // namespace oim
