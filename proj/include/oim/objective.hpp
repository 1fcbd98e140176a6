#pragma once

// Ising energies, cut values, and the exhaustive max-cut oracle.

#include <span>

#include "oim/graph.hpp"
#include "oim/readout.hpp"

namespace oim {

/// Enumeration bound for the brute-force oracle (2^(n-1) partitions).
inline constexpr int kMaxOracleVertices = 26;

/// A partition of the vertices together with its cut value and Ising
/// energy. `optimal` is set only by the oracle.
struct CutSolution {
    SpinAssignment spins;
    double cut_value = 0.0;
    double ising_energy = 0.0;
    bool optimal = false;
};

/// H = -sum_{i<j} J[i][j] sigma_i sigma_j - hfield * sum_j sigma_j.
/// The pair sum runs over unordered pairs. Spins must be binary {-1,+1};
/// ternary values are rejected.
double ising_energy(std::span<const int> spins, const CouplingMatrix& j, double hfield = 0.0);

/// Sum of w over edges whose endpoints carry opposite spins.
double cut_value(std::span<const int> spins, const ProblemGraph& g);

/// Sum of all edge weights.
double total_weight(const ProblemGraph& g);

/// Exhaustively evaluate all 2^(n-1) partitions (vertex 0 pinned to +1 to
/// quotient out the global spin flip). Ties are broken by the
/// lexicographically smallest bitstring. The reported Ising energy uses
/// J = -w (unit coupling strength) and no external field. n is limited to
/// kMaxOracleVertices.
CutSolution brute_force_maxcut(const ProblemGraph& g);

}  // namespace oim
