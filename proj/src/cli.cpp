#include "oim/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "oim/dynamics.hpp"
#include "oim/graph.hpp"
#include "oim/harness.hpp"
#include "oim/objective.hpp"
#include "oim/readout.hpp"

namespace oim::cli {

namespace {

using nlohmann::ordered_json;

// Usage problems exit with kExitUsage; anything else thrown during
// execution is a runtime failure and exits with kExitRuntime.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Command { kSolve, kOracle, kSweep, kAblate, kIsomorphs, kTrace };
enum class OutputFormat { kText, kJson, kCsv };

// Every option is optional so config-file values and command-line flags
// can be merged with flag precedence and presence checks.
struct RawOptions {
    std::optional<std::string> graph, graph_file, config_path, format, out, dump_trace, shil,
        shil_waveform, integrator, c_values, unresolved, early_stop, wrap_phases;
    std::optional<double> c, c_ramp, shil_gain, shil_ramp, shil_phase, shil_detuning, noise,
        sigma_omega, dt, t_end, tol;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials, shil_harmonic, threads, bits, permutations, sample_stride;
};

struct Plan {
    Command command = Command::kSolve;
    std::string command_name;
    std::string graph_source;
    bool graph_is_file = false;
    SimConfig sim;
    HarnessOptions harness;
    int trials = 100;
    std::uint64_t seed = 0;
    int permutations = 4;
    std::vector<double> c_values;
    OutputFormat format = OutputFormat::kText;
    std::optional<std::string> out, dump_trace;
    ordered_json config_echo;
};

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::string trim(std::string_view s) {
    const char* ws = " \t\r";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || end != value.data() + value.size())
        throw UsageError("config key '" + key + "': invalid number '" + value + "'");
    return out;
}

int to_int(const std::string& key, const std::string& value) {
    long long out = 0;
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || end != value.data() + value.size() || out < INT_MIN || out > INT_MAX)
        throw UsageError("config key '" + key + "': invalid integer '" + value + "'");
    return static_cast<int>(out);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || end != value.data() + value.size())
        throw UsageError("config key '" + key + "': invalid unsigned integer '" + value + "'");
    return out;
}

void apply_config_entry(RawOptions& o, const std::string& key, const std::string& value) {
    if (key == "graph") o.graph = value;
    else if (key == "graph_file") o.graph_file = value;
    else if (key == "format") o.format = value;
    else if (key == "out") o.out = value;
    else if (key == "dump_trace") o.dump_trace = value;
    else if (key == "shil") o.shil = value;
    else if (key == "shil_waveform") o.shil_waveform = value;
    else if (key == "integrator") o.integrator = value;
    else if (key == "c_values") o.c_values = value;
    else if (key == "unresolved") o.unresolved = value;
    else if (key == "early_stop") o.early_stop = value;
    else if (key == "wrap_phases") o.wrap_phases = value;
    else if (key == "c") o.c = to_double(key, value);
    else if (key == "c_ramp") o.c_ramp = to_double(key, value);
    else if (key == "shil_gain") o.shil_gain = to_double(key, value);
    else if (key == "shil_ramp") o.shil_ramp = to_double(key, value);
    else if (key == "shil_phase") o.shil_phase = to_double(key, value);
    else if (key == "shil_detuning") o.shil_detuning = to_double(key, value);
    else if (key == "noise") o.noise = to_double(key, value);
    else if (key == "sigma_omega") o.sigma_omega = to_double(key, value);
    else if (key == "dt") o.dt = to_double(key, value);
    else if (key == "t_end") o.t_end = to_double(key, value);
    else if (key == "tol") o.tol = to_double(key, value);
    else if (key == "seed") o.seed = to_u64(key, value);
    else if (key == "trials") o.trials = to_int(key, value);
    else if (key == "shil_harmonic") o.shil_harmonic = to_int(key, value);
    else if (key == "threads") o.threads = to_int(key, value);
    else if (key == "bits") o.bits = to_int(key, value);
    else if (key == "permutations") o.permutations = to_int(key, value);
    else if (key == "sample_stride") o.sample_stride = to_int(key, value);
    else throw UsageError("unknown config key '" + key + "'");
}

RawOptions load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    RawOptions o;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw UsageError("config line " + std::to_string(line_no) + ": missing key");
        apply_config_entry(o, key, value);
    }
    return o;
}

// Command-line flags take precedence over config-file values; a --graph
// flag also displaces any graph source the file provided.
RawOptions merge_options(RawOptions file, const RawOptions& flags) {
    if (flags.graph) {
        file.graph = flags.graph;
        file.graph_file.reset();
    }
    auto overlay = [](auto& base, const auto& over) {
        if (over) base = over;
    };
    overlay(file.graph_file, flags.graph_file);
    overlay(file.format, flags.format);
    overlay(file.out, flags.out);
    overlay(file.dump_trace, flags.dump_trace);
    overlay(file.shil, flags.shil);
    overlay(file.shil_waveform, flags.shil_waveform);
    overlay(file.integrator, flags.integrator);
    overlay(file.c_values, flags.c_values);
    overlay(file.unresolved, flags.unresolved);
    overlay(file.early_stop, flags.early_stop);
    overlay(file.wrap_phases, flags.wrap_phases);
    overlay(file.c, flags.c);
    overlay(file.c_ramp, flags.c_ramp);
    overlay(file.shil_gain, flags.shil_gain);
    overlay(file.shil_ramp, flags.shil_ramp);
    overlay(file.shil_phase, flags.shil_phase);
    overlay(file.shil_detuning, flags.shil_detuning);
    overlay(file.noise, flags.noise);
    overlay(file.sigma_omega, flags.sigma_omega);
    overlay(file.dt, flags.dt);
    overlay(file.t_end, flags.t_end);
    overlay(file.tol, flags.tol);
    overlay(file.seed, flags.seed);
    overlay(file.trials, flags.trials);
    overlay(file.shil_harmonic, flags.shil_harmonic);
    overlay(file.threads, flags.threads);
    overlay(file.bits, flags.bits);
    overlay(file.permutations, flags.permutations);
    overlay(file.sample_stride, flags.sample_stride);
    return file;
}

bool parse_on_off(const std::string& key, const std::string& value) {
    if (value == "on" || value == "true" || value == "1") return true;
    if (value == "off" || value == "false" || value == "0") return false;
    throw UsageError("'" + key + "' must be on or off, got '" + value + "'");
}

struct WaveformSpec {
    Waveform waveform = Waveform::kRectangular;
    double duty = 0.1;
    std::string canonical = "rect";
};

WaveformSpec parse_waveform(const std::string& spec) {
    if (spec == "sin") return {Waveform::kSinusoidal, 0.1, "sin"};
    if (spec == "rect") return {Waveform::kRectangular, 0.1, "rect"};
    if (spec == "pulse" || spec.rfind("pulse:", 0) == 0) {
        double duty = 0.1;
        if (spec.size() > 5 && spec[5] == ':')
            duty = to_double("shil_waveform", spec.substr(6));
        if (!(duty > 0.0) || !(duty < 1.0))
            throw UsageError("pulse duty must lie in (0, 1)");
        return {Waveform::kPulse, duty, "pulse:" + format_double(duty)};
    }
    throw UsageError("unknown waveform '" + spec + "' (expected sin, rect, or pulse[:duty])");
}

std::vector<double> parse_c_values(const std::string& spec) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const auto comma = spec.find(',', pos);
        const std::string token =
            trim(comma == std::string::npos ? spec.substr(pos) : spec.substr(pos, comma - pos));
        if (token.empty()) throw UsageError("--c-values contains an empty entry");
        const double c = to_double("c_values", token);
        if (!(c > 0.0) || !std::isfinite(c))
            throw UsageError("--c-values entries must be positive");
        values.push_back(c);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (values.empty()) throw UsageError("--c-values needs at least one entry");
    return values;
}

std::string join_c_values(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

Command command_from_name(const std::string& name) {
    if (name == "solve") return Command::kSolve;
    if (name == "oracle") return Command::kOracle;
    if (name == "sweep") return Command::kSweep;
    if (name == "ablate") return Command::kAblate;
    if (name == "isomorphs") return Command::kIsomorphs;
    return Command::kTrace;
}

Plan build_plan(const std::string& command_name, const RawOptions& o) {
    Plan p;
    p.command_name = command_name;
    p.command = command_from_name(command_name);
    const bool runs_trials = p.command == Command::kSolve || p.command == Command::kSweep ||
                             p.command == Command::kAblate || p.command == Command::kIsomorphs;
    const bool runs_sim = p.command != Command::kOracle;

    if (o.graph && o.graph_file)
        throw UsageError("give either a named graph or a graph file, not both");
    if (o.graph) {
        p.graph_source = *o.graph;
        p.graph_is_file = !is_named_graph(*o.graph);
    } else if (o.graph_file) {
        p.graph_source = *o.graph_file;
        p.graph_is_file = true;
    } else {
        throw UsageError("a graph is required (--graph <name|path>)");
    }

    const double c = o.c.value_or(0.2);
    if (!(c > 0.0) || !std::isfinite(c)) throw UsageError("--c must be positive");
    const double c_ramp = o.c_ramp.value_or(0.0);
    if (!(c_ramp >= 0.0) || !std::isfinite(c_ramp))
        throw UsageError("--c-ramp must be non-negative");
    p.sim.coupling_gain =
        c_ramp > 0.0 ? Schedule::linear_ramp(0.0, c, c_ramp) : Schedule::constant(c);

    const bool shil_on = parse_on_off("shil", o.shil.value_or("on"));
    if (!shil_on && (o.shil_gain || o.shil_ramp || o.shil_waveform || o.shil_harmonic ||
                     o.shil_phase || o.shil_detuning))
        throw UsageError("--shil off conflicts with explicit injection settings");
    if (!shil_on && p.command == Command::kAblate)
        throw UsageError("--shil off would make both ablation arms identical");
    const double shil_gain = o.shil_gain.value_or(0.5);
    if (!(shil_gain >= 0.0) || !std::isfinite(shil_gain))
        throw UsageError("--shil-gain must be non-negative");
    const double shil_ramp = o.shil_ramp.value_or(150.0);
    if (!(shil_ramp >= 0.0) || !std::isfinite(shil_ramp))
        throw UsageError("--shil-ramp must be non-negative");
    if (shil_on)
        p.sim.shil_gain = shil_ramp > 0.0 ? Schedule::linear_ramp(0.0, shil_gain, shil_ramp)
                                          : Schedule::constant(shil_gain);
    else
        p.sim.shil_gain = Schedule::constant(0.0);

    const int harmonic = o.shil_harmonic.value_or(2);
    if (harmonic != 2 && harmonic != 3)
        throw UsageError("--shil-harmonic must be 2 or 3");
    if (harmonic == 3 && runs_trials)
        throw UsageError(
            "ternary locking (--shil-harmonic 3) has no max-cut readout; use the trace command");
    p.sim.shil_harmonic = harmonic;

    const WaveformSpec waveform = parse_waveform(o.shil_waveform.value_or("rect"));
    p.sim.shil_waveform = waveform.waveform;
    p.sim.pulse_duty = waveform.duty;
    p.sim.shil_phase_offset = o.shil_phase.value_or(0.0);
    p.sim.shil_detuning = o.shil_detuning.value_or(0.0);

    const double noise = o.noise.value_or(0.0);
    if (!(noise >= 0.0) || !std::isfinite(noise))
        throw UsageError("--noise must be non-negative");
    std::string integrator;
    if (o.integrator) {
        if (*o.integrator == "rk4") integrator = "rk4";
        else if (*o.integrator == "em" || *o.integrator == "euler_maruyama") integrator = "em";
        else throw UsageError("unknown integrator '" + *o.integrator + "' (expected rk4 or em)");
        if (integrator == "rk4" && noise > 0.0)
            throw UsageError("noise requires the euler-maruyama integrator (--integrator em)");
    } else {
        integrator = noise > 0.0 ? "em" : "rk4";
    }
    p.sim.noise_amplitude = noise;
    p.sim.integrator =
        integrator == "rk4" ? IntegratorKind::kRk4 : IntegratorKind::kEulerMaruyama;

    p.sim.sigma_omega = o.sigma_omega.value_or(0.01);
    p.sim.dt = o.dt.value_or(1e-2);
    p.sim.t_end = o.t_end.value_or(200.0);
    p.sim.sample_stride = o.sample_stride.value_or(10);
    p.sim.early_stop = parse_on_off("early_stop", o.early_stop.value_or("off"));
    p.sim.wrap_phases = parse_on_off("wrap_phases", o.wrap_phases.value_or("on"));
    p.seed = o.seed.value_or(0);
    p.sim.seed = p.seed;

    p.trials = o.trials.value_or(100);
    if (p.trials < 1) throw UsageError("--trials must be at least 1");
    const int threads_requested = o.threads.value_or(0);
    if (threads_requested < 0) throw UsageError("--threads must be non-negative");
    int threads = threads_requested;
    if (threads == 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    p.harness.threads = threads;

    const int bits = o.bits.value_or(0);
    if (bits < 0 || bits > 16) throw UsageError("--bits must lie in [0, 16]");
    p.harness.weight_bits = bits;
    const double tol = o.tol.value_or(0.3);
    if (!(tol > 0.0) || !(tol < std::numbers::pi / 2.0))
        throw UsageError("--tol must lie in (0, pi/2)");
    p.harness.spin_tolerance = tol;
    const std::string unresolved = o.unresolved.value_or("fail");
    if (unresolved == "fail") p.harness.policy = UnresolvedPolicy::kCountAsFailure;
    else if (unresolved == "keep") p.harness.policy = UnresolvedPolicy::kKeepWithFlag;
    else throw UsageError("--unresolved must be fail or keep");

    p.permutations = o.permutations.value_or(4);
    if (p.permutations < 1) throw UsageError("--permutations must be at least 1");
    p.c_values = parse_c_values(o.c_values.value_or("0.1,0.2"));

    const std::string default_format =
        p.command == Command::kSweep || p.command == Command::kTrace ? "csv" : "text";
    const std::string format = o.format.value_or(default_format);
    if (format == "text") p.format = OutputFormat::kText;
    else if (format == "json") p.format = OutputFormat::kJson;
    else if (format == "csv") p.format = OutputFormat::kCsv;
    else throw UsageError("unknown format '" + format + "' (expected json, csv, or text)");
    if (p.command == Command::kTrace && p.format != OutputFormat::kCsv)
        throw UsageError("trace emits CSV only");
    if (p.format == OutputFormat::kCsv && p.command != Command::kTrace &&
        p.command != Command::kSweep)
        throw UsageError("csv output is only available for sweep and trace");

    p.out = o.out;
    p.dump_trace = o.dump_trace;

    try {
        if (runs_sim) p.sim.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    // Effective configuration; rerunning with these keys in a config file
    // reproduces the run.
    ordered_json echo;
    if (p.graph_is_file) echo["graph_file"] = p.graph_source;
    else echo["graph"] = p.graph_source;
    if (runs_sim) echo["seed"] = p.seed;
    if (runs_trials) {
        echo["trials"] = p.trials;
        echo["threads"] = p.harness.threads;
    }
    if (p.command == Command::kIsomorphs) echo["permutations"] = p.permutations;
    if (p.command == Command::kSweep) echo["c_values"] = join_c_values(p.c_values);
    if (runs_sim) {
        if (p.command != Command::kSweep) {
            echo["c"] = c;
            echo["c_ramp"] = c_ramp;
        }
        echo["shil"] = shil_on ? "on" : "off";
        if (shil_on) {
            echo["shil_gain"] = shil_gain;
            echo["shil_ramp"] = shil_ramp;
            echo["shil_waveform"] = waveform.canonical;
            echo["shil_harmonic"] = harmonic;
            echo["shil_phase"] = p.sim.shil_phase_offset;
            echo["shil_detuning"] = p.sim.shil_detuning;
        }
        echo["noise"] = noise;
        echo["sigma_omega"] = p.sim.sigma_omega;
        echo["dt"] = p.sim.dt;
        echo["t_end"] = p.sim.t_end;
        echo["integrator"] = integrator;
        echo["sample_stride"] = p.sim.sample_stride;
        echo["early_stop"] = p.sim.early_stop ? "on" : "off";
        echo["wrap_phases"] = p.sim.wrap_phases ? "on" : "off";
        echo["bits"] = bits;
    }
    if (runs_trials) {
        echo["tol"] = tol;
        echo["unresolved"] = unresolved;
    }
    echo["format"] = format;
    p.config_echo = echo;
    return p;
}

ProblemGraph load_plan_graph(const Plan& p) {
    if (!p.graph_is_file) return named_graph(p.graph_source);
    if (!std::filesystem::exists(p.graph_source))
        throw std::runtime_error("graph '" + p.graph_source +
                                 "' is neither a named graph nor a readable file");
    return load_edge_list_file(p.graph_source);
}

void emit(const Plan& p, const std::string& content) {
    if (p.out) {
        std::ofstream out(*p.out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write output file '" + *p.out + "'");
        out << content;
        if (!out) throw std::runtime_error("failed writing output file '" + *p.out + "'");
    } else {
        std::cout << content;
    }
}

std::string timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string echo_value_text(const ordered_json& value) {
    return value.is_string() ? value.get<std::string>() : value.dump();
}

std::string config_text(const Plan& p) {
    std::string out = "effective config:\n";
    for (const auto& [key, value] : p.config_echo.items())
        out += "  " + key + " = " + echo_value_text(value) + "\n";
    return out;
}

// CSV payloads stay machine-readable; the config block goes to stderr.
void echo_config_to_stderr(const Plan& p) {
    for (const auto& [key, value] : p.config_echo.items())
        std::cerr << "# " << key << " = " << echo_value_text(value) << "\n";
}

ordered_json json_envelope(const Plan& p) {
    ordered_json j;
    j["command"] = p.command_name;
    j["generated_at"] = timestamp_utc();
    j["config"] = p.config_echo;
    return j;
}

ordered_json graph_json(const Plan& p, const ProblemGraph& g) {
    ordered_json j;
    j["source"] = p.graph_source;
    j["n"] = g.n;
    j["m"] = g.edges.size();
    return j;
}

ordered_json solution_json(const CutSolution& s) {
    const auto [plus, minus] = s.spins.partition_sets();
    ordered_json j;
    j["bitstring"] = s.spins.bitstring();
    j["sets"] = ordered_json::array({plus, minus});
    j["cut_value"] = s.cut_value;
    j["ising_energy"] = s.ising_energy;
    j["optimal"] = s.optimal;
    return j;
}

ordered_json stats_json(const SuccessStats& s) {
    ordered_json j;
    j["trials"] = s.trials;
    j["oracle_cut"] = s.oracle_cut;
    j["success_rate"] = s.success_rate;
    j["unresolved_rate"] = s.unresolved_rate;
    j["mean_settle_time"] = s.mean_settle_time;
    j["mean_cut"] = s.mean_cut;
    j["approx_ratio"] = s.approx_ratio;
    ordered_json histogram = ordered_json::array();
    for (const auto& [cut, count] : s.cut_histogram)
        histogram.push_back(ordered_json{{"cut", cut}, {"count", count}});
    j["cut_histogram"] = histogram;
    ordered_json optima = ordered_json::object();
    for (const auto& [bits, count] : s.optimal_bitstrings) optima[bits] = count;
    j["optimal_bitstrings"] = optima;
    return j;
}

std::string set_text(const std::vector<int>& vertices) {
    std::string out = "{";
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(vertices[i]);
    }
    return out + "}";
}

std::string graph_text(const Plan& p, const ProblemGraph& g) {
    return "graph: " + p.graph_source + " (n = " + std::to_string(g.n) +
           ", m = " + std::to_string(g.edges.size()) + ")\n";
}

std::string solution_text(const CutSolution& s) {
    const auto [plus, minus] = s.spins.partition_sets();
    return "max cut: " + format_double(s.cut_value) + "\nbitstring: " + s.spins.bitstring() +
           "\npartition: " + set_text(plus) + " | " + set_text(minus) +
           "\nising energy (unit coupling, no field): " + format_double(s.ising_energy) + "\n";
}

std::string stats_text(const SuccessStats& s, const std::string& indent) {
    std::string out;
    out += indent + "trials: " + std::to_string(s.trials) + "\n";
    out += indent + "oracle cut: " + format_double(s.oracle_cut) + "\n";
    out += indent + "success rate: " + format_double(s.success_rate) + "\n";
    out += indent + "unresolved rate: " + format_double(s.unresolved_rate) + "\n";
    out += indent + "mean cut: " + format_double(s.mean_cut) +
           " (approx ratio " + format_double(s.approx_ratio) + ")\n";
    out += indent + "mean settle time: " + format_double(s.mean_settle_time) + "\n";
    out += indent + "cut histogram:\n";
    for (const auto& [cut, count] : s.cut_histogram)
        out += indent + "  " + format_double(cut) + ": " + std::to_string(count) + "\n";
    if (!s.optimal_bitstrings.empty()) {
        out += indent + "optimal partitions visited:\n";
        for (const auto& [bits, count] : s.optimal_bitstrings)
            out += indent + "  " + bits + " x " + std::to_string(count) + "\n";
    }
    return out;
}

void dump_trajectories(const std::string& prefix, const std::vector<TrialRecord>& records) {
    for (std::size_t k = 0; k < records.size(); ++k) {
        if (!records[k].trajectory) continue;
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, ".trial%04zu.csv", k);
        const std::string path = prefix + suffix;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write trajectory file '" + path + "'");
        out << records[k].trajectory->to_csv();
    }
}

void cmd_solve(const Plan& p) {
    const ProblemGraph g = load_plan_graph(p);
    const CutSolution oracle = brute_force_maxcut(g);
    HarnessOptions opts = p.harness;
    opts.keep_trajectories = p.dump_trace.has_value();
    std::vector<TrialRecord> records;
    const SuccessStats stats = run_trials_collect(g, p.sim, p.trials, p.seed, opts, records);
    if (p.dump_trace) dump_trajectories(*p.dump_trace, records);

    if (p.format == OutputFormat::kJson) {
        ordered_json j = json_envelope(p);
        j["graph"] = graph_json(p, g);
        j["oracle"] = solution_json(oracle);
        j["stats"] = stats_json(stats);
        emit(p, j.dump(2) + "\n");
    } else {
        std::string out = config_text(p) + "\n" + graph_text(p, g);
        const auto [plus, minus] = oracle.spins.partition_sets();
        out += "oracle cut: " + format_double(oracle.cut_value) + " (bitstring " +
               oracle.spins.bitstring() + ", partition " + set_text(plus) + " | " +
               set_text(minus) + ")\n";
        out += stats_text(stats, "");
        emit(p, out);
    }
}

void cmd_oracle(const Plan& p) {
    const ProblemGraph g = load_plan_graph(p);
    const CutSolution solution = brute_force_maxcut(g);
    if (p.format == OutputFormat::kJson) {
        ordered_json j = json_envelope(p);
        j["graph"] = graph_json(p, g);
        j["result"] = solution_json(solution);
        emit(p, j.dump(2) + "\n");
    } else {
        emit(p, config_text(p) + "\n" + graph_text(p, g) + solution_text(solution));
    }
}

void cmd_sweep(const Plan& p) {
    const ProblemGraph g = load_plan_graph(p);
    const auto rows = sweep_coupling(g, p.sim, p.c_values, p.trials, p.seed, p.harness);
    if (p.format == OutputFormat::kJson) {
        ordered_json j = json_envelope(p);
        j["graph"] = graph_json(p, g);
        ordered_json out_rows = ordered_json::array();
        for (const auto& [c, stats] : rows) {
            ordered_json row;
            row["c"] = c;
            row["stats"] = stats_json(stats);
            out_rows.push_back(row);
        }
        j["rows"] = out_rows;
        emit(p, j.dump(2) + "\n");
    } else if (p.format == OutputFormat::kCsv) {
        echo_config_to_stderr(p);
        emit(p, sweep_to_csv(rows));
    } else {
        emit(p, config_text(p) + "\n" + graph_text(p, g) + sweep_to_csv(rows));
    }
}

void cmd_ablate(const Plan& p) {
    const ProblemGraph g = load_plan_graph(p);
    const AblationResult result = shil_ablation(g, p.sim, p.trials, p.seed, p.harness);
    if (p.format == OutputFormat::kJson) {
        ordered_json j = json_envelope(p);
        j["graph"] = graph_json(p, g);
        j["with_shil"] = stats_json(result.with_shil);
        j["without_shil"] = stats_json(result.without_shil);
        emit(p, j.dump(2) + "\n");
    } else {
        std::string out = config_text(p) + "\n" + graph_text(p, g);
        out += "with injection locking:\n" + stats_text(result.with_shil, "  ");
        out += "without injection locking:\n" + stats_text(result.without_shil, "  ");
        out += "success delta: " +
               format_double(result.with_shil.success_rate - result.without_shil.success_rate) +
               "\n";
        emit(p, out);
    }
}

void cmd_isomorphs(const Plan& p) {
    const ProblemGraph g = load_plan_graph(p);
    const IsomorphResult result =
        isomorph_battery(g, p.permutations, p.sim, p.trials, p.seed, p.harness);
    if (p.format == OutputFormat::kJson) {
        ordered_json j = json_envelope(p);
        j["graph"] = graph_json(p, g);
        j["oracle_cut"] = result.oracle_cut;
        j["oracle_consistent"] = result.oracle_consistent;
        ordered_json isomorphs = ordered_json::array();
        for (std::size_t k = 0; k < result.stats.size(); ++k) {
            ordered_json row;
            row["permutation"] = result.permutations[k];
            row["stats"] = stats_json(result.stats[k]);
            isomorphs.push_back(row);
        }
        j["isomorphs"] = isomorphs;
        emit(p, j.dump(2) + "\n");
    } else {
        std::string out = config_text(p) + "\n" + graph_text(p, g);
        out += "oracle cut: " + format_double(result.oracle_cut) + " (consistent across isomorphs: " +
               (result.oracle_consistent ? "yes" : "no") + ")\n";
        for (std::size_t k = 0; k < result.stats.size(); ++k) {
            out += "isomorph " + std::to_string(k) + ":\n";
            out += stats_text(result.stats[k], "  ");
        }
        emit(p, out);
    }
}

void cmd_trace(const Plan& p) {
    const ProblemGraph g = load_plan_graph(p);
    std::mt19937_64 rng(p.seed);
    const NaturalFrequencies freqs = NaturalFrequencies::draw(g.n, p.sim.sigma_omega, rng);
    const std::vector<double> theta0 = random_initial_phases(g.n, rng);
    CouplingMatrix j = to_coupling(g, 1.0);
    if (p.harness.weight_bits > 0) j = quantize_weights(j, p.harness.weight_bits);
    const Trajectory traj = integrate(j, freqs, p.sim, theta0, &rng);
    echo_config_to_stderr(p);
    emit(p, traj.to_csv());
}

void execute(const Plan& p) {
    switch (p.command) {
        case Command::kSolve: cmd_solve(p); return;
        case Command::kOracle: cmd_oracle(p); return;
        case Command::kSweep: cmd_sweep(p); return;
        case Command::kAblate: cmd_ablate(p); return;
        case Command::kIsomorphs: cmd_isomorphs(p); return;
        case Command::kTrace: cmd_trace(p); return;
    }
}

}  // namespace

int run(int argc, const char* const* argv) {
    RawOptions flags;
    CLI::App app{"Coupled-oscillator Ising machine simulator for max-cut problems", "oim"};
    app.require_subcommand(1);

    // The vendored CLI11 build has no std::optional bindings, so options
    // land in the optional slots through callbacks; an untouched slot
    // means "not given" and defers to config-file values or defaults.
    auto add_str = [](CLI::App* cmd, const char* name, std::optional<std::string>* slot,
                      const char* help) {
        cmd->add_option_function<std::string>(
            name, [slot](const std::string& v) { *slot = v; }, help);
    };
    auto add_dbl = [](CLI::App* cmd, const char* name, std::optional<double>* slot,
                      const char* help) {
        cmd->add_option_function<double>(name, [slot](const double& v) { *slot = v; }, help);
    };
    auto add_int = [](CLI::App* cmd, const char* name, std::optional<int>* slot,
                      const char* help) {
        cmd->add_option_function<int>(name, [slot](const int& v) { *slot = v; }, help);
    };
    auto add_u64 = [](CLI::App* cmd, const char* name, std::optional<std::uint64_t>* slot,
                      const char* help) {
        cmd->add_option_function<std::uint64_t>(
            name, [slot](const std::uint64_t& v) { *slot = v; }, help);
    };

    auto add_common = [&](CLI::App* cmd) {
        add_str(cmd, "--graph", &flags.graph,
                "named graph (house, triangle, ring(k), complete(k), path(k)) or edge-list file");
        add_str(cmd, "--config", &flags.config_path,
                "key = value config file; flags take precedence");
        add_str(cmd, "--format", &flags.format, "output format: json, csv, or text");
        add_str(cmd, "--out", &flags.out, "write the result to this file instead of stdout");
    };
    auto add_sim = [&](CLI::App* cmd) {
        add_u64(cmd, "--seed", &flags.seed, "master seed");
        add_dbl(cmd, "--c", &flags.c, "coupling strength");
        add_dbl(cmd, "--c-ramp", &flags.c_ramp,
                "ramp the coupling from 0 to --c over this duration");
        add_str(cmd, "--shil", &flags.shil, "injection locking: on or off");
        add_dbl(cmd, "--shil-gain", &flags.shil_gain, "injection gain plateau");
        add_dbl(cmd, "--shil-ramp", &flags.shil_ramp,
                "injection gain ramp duration (0 = constant)");
        add_str(cmd, "--shil-waveform", &flags.shil_waveform, "sin, rect, or pulse[:duty]");
        add_int(cmd, "--shil-harmonic", &flags.shil_harmonic, "2 binarizes, 3 ternarizes");
        add_dbl(cmd, "--shil-phase", &flags.shil_phase, "injection phase offset in radians");
        add_dbl(cmd, "--shil-detuning", &flags.shil_detuning, "injection frequency offset");
        add_dbl(cmd, "--noise", &flags.noise, "phase noise amplitude");
        add_dbl(cmd, "--sigma-omega", &flags.sigma_omega, "oscillator detuning spread");
        add_dbl(cmd, "--dt", &flags.dt, "integration step");
        add_dbl(cmd, "--t-end", &flags.t_end, "integration horizon");
        add_str(cmd, "--integrator", &flags.integrator, "rk4 or em");
        add_int(cmd, "--bits", &flags.bits, "coupling weight resolution in bits (0 = full)");
    };
    auto add_trials = [&](CLI::App* cmd) {
        add_int(cmd, "--trials", &flags.trials, "number of independent trials");
        add_int(cmd, "--threads", &flags.threads, "worker threads (0 = all cores)");
        add_dbl(cmd, "--tol", &flags.tol, "readout ambiguity tolerance in radians");
        add_str(cmd, "--unresolved", &flags.unresolved, "unresolved-trial policy: fail or keep");
    };

    CLI::App* solve =
        app.add_subcommand("solve", "run seeded trials and score them against the oracle");
    add_common(solve);
    add_sim(solve);
    add_trials(solve);
    add_str(solve, "--dump-trace", &flags.dump_trace,
            "write one trajectory CSV per trial using this path prefix");

    CLI::App* oracle = app.add_subcommand("oracle", "exhaustive max-cut solution");
    add_common(oracle);

    CLI::App* sweep = app.add_subcommand("sweep", "trial batteries over coupling strengths");
    add_common(sweep);
    add_sim(sweep);
    add_trials(sweep);
    add_str(sweep, "--c-values", &flags.c_values, "comma-separated coupling strengths");

    CLI::App* ablate =
        app.add_subcommand("ablate", "paired comparison with the injection signal forced off");
    add_common(ablate);
    add_sim(ablate);
    add_trials(ablate);

    CLI::App* isomorphs =
        app.add_subcommand("isomorphs", "trial batteries over random relabelings of one graph");
    add_common(isomorphs);
    add_sim(isomorphs);
    add_trials(isomorphs);
    add_int(isomorphs, "--permutations", &flags.permutations, "number of seeded relabelings");

    CLI::App* trace =
        app.add_subcommand("trace", "integrate one run and emit the trajectory as CSV");
    add_common(trace);
    add_sim(trace);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    Plan plan;
    try {
        const RawOptions merged =
            flags.config_path ? merge_options(load_config_file(*flags.config_path), flags)
                              : flags;
        plan = build_plan(app.get_subcommands().front()->get_name(), merged);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }

    try {
        execute(plan);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

int run(const std::vector<std::string>& args) {
    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.emplace_back("oim");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const std::string& a : full) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace oim::cli
