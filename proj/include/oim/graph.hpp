#pragma once

// Max-cut problem instances: edge-list parsing, canned graphs, and the
// mapping from a weighted graph to an oscillator coupling matrix.

#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace oim {

/// One undirected edge with 0-based endpoints.
struct Edge {
    int i = 0;
    int j = 0;
    double w = 1.0;
};

/// Weighted undirected graph, the max-cut instance. Vertex indices are
/// 0-based internally; the edge-list text format is 1-based.
struct ProblemGraph {
    int n = 0;
    std::vector<Edge> edges;

    /// Equality up to edge order (unordered endpoints, same weights).
    bool operator==(const ProblemGraph& other) const;
};

/// Symmetric zero-diagonal matrix of oscillator-to-oscillator weights,
/// stored dense row-major.
struct CouplingMatrix {
    int n = 0;
    std::vector<double> values;  // n*n, row-major

    CouplingMatrix() = default;
    explicit CouplingMatrix(int dim) : n(dim), values(static_cast<std::size_t>(dim) * dim, 0.0) {}

    double operator()(int r, int c) const { return values[static_cast<std::size_t>(r) * n + c]; }
    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * n + c]; }
};

/// Parse failure; `line` is the 1-based line number in the input text.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Validate and build a graph. Throws std::invalid_argument on bad vertex
/// indices, self-loops, duplicate unordered pairs, or non-finite weights.
ProblemGraph make_graph(int n, std::vector<Edge> edges);

/// Parse "n m" header followed by m lines "i j [w]" (1-based, w defaults
/// to 1). Throws ParseError with the offending line number.
ProblemGraph parse_edge_list(std::string_view text);

/// Inverse of parse_edge_list up to edge order. Weights are rendered with
/// the shortest representation that round-trips (integers stay integers).
std::string serialize_edge_list(const ProblemGraph& g);

/// Read and parse an edge-list file.
ProblemGraph load_edge_list_file(const std::string& path);

/// Canned instances: house, triangle, ring(k), complete(k), path(k).
/// Names accept both "ring(8)" and "ring8". Throws on unknown names.
ProblemGraph named_graph(std::string_view name);

/// True if `name` is resolvable by named_graph.
bool is_named_graph(std::string_view name);

/// Relabel vertices: edge (i,j,w) maps to (perm[i],perm[j],w).
ProblemGraph permute(const ProblemGraph& g, std::span<const int> perm);

/// Uniform random permutation of {0..n-1}.
std::vector<int> random_permutation(int n, std::mt19937_64& rng);

/// J[i][j] = -strength * w for each edge; zero elsewhere. strength > 0.
CouplingMatrix to_coupling(const ProblemGraph& g, double strength);

/// All-to-all attractive coupling J[i][j] = k_total / n (i != j), the
/// classic mean-field ensemble used for synchronization-transition demos.
CouplingMatrix classic_all_to_all(int n, double k_total);

/// Snap every off-diagonal entry to one of 2^bits uniformly spaced levels
/// with spacing 2*max|J|/2^bits, the grid a digital potentiometer of that
/// resolution realizes. The grid contains 0 and the entry of largest
/// magnitude, so quantization is exactly idempotent. 1 <= bits <= 16; an
/// all-zero matrix is returned unchanged.
CouplingMatrix quantize_weights(const CouplingMatrix& m, int bits);

/// Per-vertex degree counts.
std::vector<int> vertex_degrees(const ProblemGraph& g);

}  // namespace oim
