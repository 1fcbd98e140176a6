#include "oim/objective.hpp"

#include <cstdint>
#include <stdexcept>

namespace oim {

namespace {

void require_binary(std::span<const int> spins) {
    for (int s : spins)
        if (s != 1 && s != -1)
            throw std::invalid_argument("spins must be binary (-1 or +1)");
}

}  // namespace

double ising_energy(std::span<const int> spins, const CouplingMatrix& j, double hfield) {
    if (static_cast<int>(spins.size()) != j.n)
        throw std::invalid_argument("spin vector length does not match matrix dimension");
    require_binary(spins);
    double pair_term = 0.0;
    for (int a = 0; a < j.n; ++a)
        for (int b = a + 1; b < j.n; ++b)
            pair_term += j(a, b) * spins[a] * spins[b];
    double field_term = 0.0;
    for (int s : spins) field_term += s;
    return -pair_term - hfield * field_term;
}

double cut_value(std::span<const int> spins, const ProblemGraph& g) {
    if (static_cast<int>(spins.size()) != g.n)
        throw std::invalid_argument("spin vector length does not match vertex count");
    require_binary(spins);
    double cut = 0.0;
    for (const Edge& e : g.edges)
        if (spins[e.i] != spins[e.j]) cut += e.w;
    return cut;
}

double total_weight(const ProblemGraph& g) {
    double sum = 0.0;
    for (const Edge& e : g.edges) sum += e.w;
    return sum;
}

CutSolution brute_force_maxcut(const ProblemGraph& g) {
    if (g.n < 1) throw std::invalid_argument("graph needs at least one vertex");
    if (g.n > kMaxOracleVertices)
        throw std::invalid_argument("graph too large for exhaustive enumeration (n > " +
                                    std::to_string(kMaxOracleVertices) + ")");

    const int n = g.n;
    const std::uint64_t partitions = std::uint64_t{1} << (n - 1);
    std::vector<int> spins(n, 1), best(n, 1);
    double best_cut = -1.0;

    // Vertex 0 stays +1 to quotient out the global flip. Bit (n-1-i) of the
    // mask is vertex i's bit, so ascending masks enumerate bitstrings in
    // ascending lexicographic order and keeping strict improvements breaks
    // ties toward the smallest bitstring.
    for (std::uint64_t mask = 0; mask < partitions; ++mask) {
        for (int i = 1; i < n; ++i)
            spins[i] = (mask >> (n - 1 - i)) & 1 ? -1 : 1;
        double cut = 0.0;
        for (const Edge& e : g.edges)
            if (spins[e.i] != spins[e.j]) cut += e.w;
        if (cut > best_cut) {
            best_cut = cut;
            best = spins;
        }
    }

    CutSolution solution;
    solution.spins = SpinAssignment{best, 0, SpinMode::kBinary, {}};
    solution.cut_value = best_cut;
    solution.ising_energy = ising_energy(best, to_coupling(g, 1.0), 0.0);
    solution.optimal = true;
    return solution;
}

}  // namespace oim
