#include "oim/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

namespace oim {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::vector<std::string_view> split_tokens(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
        std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
        if (pos > start) tokens.push_back(line.substr(start, pos - start));
    }
    return tokens;
}

bool parse_long(std::string_view token, long long& out) {
    auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc() && end == token.data() + token.size();
}

bool parse_real(std::string_view token, double& out) {
    auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc() && end == token.data() + token.size();
}

// Normalized edge key for duplicate detection and order-insensitive equality.
std::pair<int, int> unordered_pair(const Edge& e) {
    return {std::min(e.i, e.j), std::max(e.i, e.j)};
}

}  // namespace

bool ProblemGraph::operator==(const ProblemGraph& other) const {
    if (n != other.n || edges.size() != other.edges.size()) return false;
    auto normalize = [](const ProblemGraph& g) {
        std::vector<std::tuple<int, int, double>> out;
        out.reserve(g.edges.size());
        for (const Edge& e : g.edges) {
            auto [lo, hi] = unordered_pair(e);
            out.emplace_back(lo, hi, e.w);
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    return normalize(*this) == normalize(other);
}

ProblemGraph make_graph(int n, std::vector<Edge> edges) {
    if (n < 1) throw std::invalid_argument("graph needs at least one vertex");
    std::set<std::pair<int, int>> seen;
    for (const Edge& e : edges) {
        if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (e.i == e.j) throw std::invalid_argument("self-loops are not allowed");
        if (!std::isfinite(e.w)) throw std::invalid_argument("edge weight must be finite");
        if (!seen.insert(unordered_pair(e)).second)
            throw std::invalid_argument("duplicate edge");
    }
    return ProblemGraph{n, std::move(edges)};
}

ProblemGraph parse_edge_list(std::string_view text) {
    // Split into lines up front so every error can carry a line number.
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line =
            nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }

    long long n = 0, m = 0;
    bool header_seen = false;
    std::vector<Edge> edges;
    std::set<std::pair<int, int>> seen;

    for (std::size_t idx = 0; idx < lines.size(); ++idx) {
        const int line_no = static_cast<int>(idx) + 1;
        auto tokens = split_tokens(lines[idx]);
        if (tokens.empty()) continue;

        if (!header_seen) {
            if (tokens.size() != 2 || !parse_long(tokens[0], n) || !parse_long(tokens[1], m))
                throw ParseError(line_no, "malformed header, expected \"n m\"");
            if (n < 1) throw ParseError(line_no, "vertex count must be positive");
            if (m < 0) throw ParseError(line_no, "edge count must be non-negative");
            header_seen = true;
            continue;
        }

        if (static_cast<long long>(edges.size()) == m)
            throw ParseError(line_no, "more edge lines than the header announced");
        if (tokens.size() != 2 && tokens.size() != 3)
            throw ParseError(line_no, "malformed edge, expected \"i j [w]\"");
        long long i = 0, j = 0;
        double w = 1.0;
        if (!parse_long(tokens[0], i) || !parse_long(tokens[1], j))
            throw ParseError(line_no, "malformed vertex index");
        if (tokens.size() == 3 && !parse_real(tokens[2], w))
            throw ParseError(line_no, "malformed edge weight");
        if (!std::isfinite(w)) throw ParseError(line_no, "edge weight must be finite");
        if (i < 1 || i > n || j < 1 || j > n)
            throw ParseError(line_no, "vertex index out of range [1, " + std::to_string(n) + "]");
        if (i == j) throw ParseError(line_no, "self-loops are not allowed");
        Edge e{static_cast<int>(i - 1), static_cast<int>(j - 1), w};
        if (!seen.insert(unordered_pair(e)).second)
            throw ParseError(line_no, "duplicate edge");
        edges.push_back(e);
    }

    if (!header_seen) throw ParseError(1, "missing header line");
    if (static_cast<long long>(edges.size()) != m)
        throw ParseError(static_cast<int>(lines.size()),
                         "expected " + std::to_string(m) + " edges, found " +
                             std::to_string(edges.size()));
    return make_graph(static_cast<int>(n), std::move(edges));
}

std::string serialize_edge_list(const ProblemGraph& g) {
    std::string out = std::to_string(g.n) + " " + std::to_string(g.edges.size());
    for (const Edge& e : g.edges) {
        out += "\n" + std::to_string(e.i + 1) + " " + std::to_string(e.j + 1) + " " +
               format_double(e.w);
    }
    return out;
}

ProblemGraph load_edge_list_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_edge_list(buffer.str());
}

namespace {

ProblemGraph ring_graph(int k) {
    if (k < 3) throw std::invalid_argument("a ring needs at least 3 vertices");
    std::vector<Edge> edges;
    edges.reserve(k);
    for (int i = 0; i + 1 < k; ++i) edges.push_back({i, i + 1, 1.0});
    edges.push_back({k - 1, 0, 1.0});
    return make_graph(k, std::move(edges));
}

ProblemGraph complete_graph(int k) {
    if (k < 1) throw std::invalid_argument("a complete graph needs at least 1 vertex");
    std::vector<Edge> edges;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) edges.push_back({i, j, 1.0});
    return make_graph(k, std::move(edges));
}

ProblemGraph path_graph(int k) {
    if (k < 1) throw std::invalid_argument("a path needs at least 1 vertex");
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < k; ++i) edges.push_back({i, i + 1, 1.0});
    return make_graph(k, std::move(edges));
}

// Accepts "ring(8)" and "ring8"; returns false if no usable size suffix.
bool parse_sized_name(std::string_view name, std::string_view prefix, int& k) {
    if (name.substr(0, prefix.size()) != prefix) return false;
    std::string_view rest = name.substr(prefix.size());
    if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')')
        rest = rest.substr(1, rest.size() - 2);
    if (rest.empty()) return false;
    long long value = 0;
    if (!parse_long(rest, value) || value < 1 || value > 1'000'000) return false;
    k = static_cast<int>(value);
    return true;
}

}  // namespace

ProblemGraph named_graph(std::string_view name) {
    if (name == "house") {
        // 1-based edge set {(1,2),(2,3),(3,4),(4,5),(5,1),(2,5)}.
        return make_graph(5, {{0, 1, 1.0},
                              {1, 2, 1.0},
                              {2, 3, 1.0},
                              {3, 4, 1.0},
                              {4, 0, 1.0},
                              {1, 4, 1.0}});
    }
    if (name == "triangle") return ring_graph(3);
    int k = 0;
    if (parse_sized_name(name, "ring", k)) return ring_graph(k);
    if (parse_sized_name(name, "complete", k)) return complete_graph(k);
    if (parse_sized_name(name, "path", k)) return path_graph(k);
    throw std::invalid_argument("unknown graph name '" + std::string(name) + "'");
}

bool is_named_graph(std::string_view name) {
    try {
        named_graph(name);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

ProblemGraph permute(const ProblemGraph& g, std::span<const int> perm) {
    if (static_cast<int>(perm.size()) != g.n)
        throw std::invalid_argument("permutation length does not match vertex count");
    std::vector<bool> seen(g.n, false);
    for (int p : perm) {
        if (p < 0 || p >= g.n || seen[p])
            throw std::invalid_argument("permutation is not a bijection on the vertices");
        seen[p] = true;
    }
    std::vector<Edge> edges;
    edges.reserve(g.edges.size());
    for (const Edge& e : g.edges) edges.push_back({perm[e.i], perm[e.j], e.w});
    return make_graph(g.n, std::move(edges));
}

std::vector<int> random_permutation(int n, std::mt19937_64& rng) {
    if (n < 1) throw std::invalid_argument("permutation needs at least one element");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

CouplingMatrix to_coupling(const ProblemGraph& g, double strength) {
    if (!(strength > 0.0) || !std::isfinite(strength))
        throw std::invalid_argument("coupling strength must be positive");
    CouplingMatrix m(g.n);
    for (const Edge& e : g.edges) {
        m.at(e.i, e.j) = -strength * e.w;
        m.at(e.j, e.i) = -strength * e.w;
    }
    return m;
}

CouplingMatrix classic_all_to_all(int n, double k_total) {
    if (n < 1) throw std::invalid_argument("need at least one oscillator");
    if (!std::isfinite(k_total)) throw std::invalid_argument("coupling must be finite");
    CouplingMatrix m(n);
    const double value = k_total / n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) m.at(i, j) = value;
    return m;
}

CouplingMatrix quantize_weights(const CouplingMatrix& m, int bits) {
    if (bits < 1 || bits > 16) throw std::invalid_argument("bits must be in [1, 16]");
    double amp = 0.0;
    for (double v : m.values) {
        if (!std::isfinite(v)) throw std::invalid_argument("matrix entries must be finite");
        amp = std::max(amp, std::fabs(v));
    }
    if (amp == 0.0) return m;

    // Spacing 2*amp / 2^bits via an exact power-of-two scale, so the
    // attained extreme lands exactly on a grid level and a second pass
    // reproduces the first.
    const double delta = std::ldexp(amp, 1 - bits);
    const long long half = 1LL << (bits - 1);
    bool negative_extreme = false;
    for (double v : m.values)
        if (v == -amp) negative_extreme = true;
    const long long lo = negative_extreme ? -half : -(half - 1);
    const long long hi = negative_extreme ? half - 1 : half;

    CouplingMatrix out = m;
    for (double& v : out.values) {
        long long level = std::llround(v / delta);
        level = std::clamp(level, lo, hi);
        v = static_cast<double>(level) * delta;
    }
    return out;
}

std::vector<int> vertex_degrees(const ProblemGraph& g) {
    std::vector<int> degrees(g.n, 0);
    for (const Edge& e : g.edges) {
        ++degrees[e.i];
        ++degrees[e.j];
    }
    return degrees;
}

}  // namespace oim
