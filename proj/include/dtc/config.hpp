#ifndef DTC_CONFIG_HPP
#define DTC_CONFIG_HPP

// Plain-text experiment configuration: one `key = value` per line, '#' starts a comment.
// Angles accept pi literals ("1.1pi"), periods accept tau_r units ("0.5tau_r") and pulse
// widths accept fractions of the period ("0.3tau"). Sweeps are
//   sweep = <param> <start> <stop> <step>
//   sweep = <param> v1,v2,...
// and several sweep lines form a product grid, first line slowest.

#include <dtc/dynamics.hpp>
#include <dtc/error.hpp>
#include <dtc/hilbert.hpp>
#include <dtc/prethermal.hpp>
#include <dtc/scars.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace dtc {

enum class Experiment { echo_scan, tau_scan, nnn_scan, pairing, splitting, bloch, timescales, ghz, correlator, custom };

struct ExperimentInfo {
    Experiment id;
    const char* name;
    const char* description;
};

inline constexpr std::array<ExperimentInfo, 10> experiment_table{{
    {Experiment::echo_scan, "echo-scan",
     "subharmonic weight f2 and mean entanglement entropy vs kick angle, from |Z2> and |Z4>"},
    {Experiment::tau_scan, "tau-scan", "f2 and mean entropy vs drive period at fixed kick angle"},
    {Experiment::nnn_scan, "nnn-scan", "f2 and mean entropy vs next-nearest-neighbour coupling V2 on top of PXP"},
    {Experiment::pairing, "pairing", "pi-pairing of the |Z2>-weighted Floquet states of U_F1 vs drive period"},
    {Experiment::splitting, "splitting", "ground-doublet splitting and gap of H_F1 vs system size, exponential fit"},
    {Experiment::bloch, "bloch", "collective-spin (Bloch sphere) trajectory in the FSA scar subspace"},
    {Experiment::timescales, "timescales", "T_s, T_b, T_g of the kicked Rydberg chain from F_n and the Floquet doublet"},
    {Experiment::ghz, "ghz", "GHZ fidelity and quantum Fisher information along the drive"},
    {Experiment::correlator, "correlator", "spatiotemporal correlator C(q, omega) in the H_F1 ground state"},
    {Experiment::custom, "custom", "free drive: imbalance, return fidelity and entropy vs time"},
}};

inline const ExperimentInfo& experiment_info(Experiment e) {
    for (const auto& i : experiment_table)
        if (i.id == e)
            return i;
    throw ModelError("unknown experiment id");
}

enum class Unit { none, tau_r, tau };

struct Quantity {
    double value = 0.0;
    Unit unit = Unit::none;
};

struct SweepAxis {
    std::string param;
    std::vector<Quantity> values;
};

enum class OutputFormat { csv, jsonl };

struct ExperimentConfig {
    Experiment experiment = Experiment::custom;
    int L = 0;
    Boundary boundary = Boundary::periodic;
    DriveSpec drive;                               // tau and pulse_width resolved per point
    Quantity tau{0.5, Unit::tau_r};
    Quantity pulse_width{0.3, Unit::tau};
    std::optional<double> tau_r;                   // skips calibration when set
    std::string state = "z2";                      // z2 | z2prime | z4 | vacuum | random
    int substeps = 1;                              // >1: micromotion sampling
    int n_T = 40;                                  // correlator time window in periods
    double band = 0.1;                             // relative half width of the subharmonic band
    DoubletSelection selection = DoubletSelection::cat_overlap;
    SxNormalization sx_norm = SxNormalization::calibrated;
    bool sectors = true;
    std::vector<SweepAxis> sweeps;
    std::string output;   // empty: stdout
    std::string spectrum; // pairing: full quasi-energy table
    int workers = 1;
    std::uint64_t seed = 0;
    OutputFormat format = OutputFormat::csv;
    std::vector<std::pair<std::string, std::string>> echo; // key/value lines as given

    double epsilon() const { return std::numbers::pi - drive.theta; }

    std::size_t points() const {
        std::size_t n = 1;
        for (const auto& a : sweeps)
            n *= a.values.size();
        return n;
    }

    bool sweeps_over(std::string_view p) const {
        return std::any_of(sweeps.begin(), sweeps.end(), [&](const SweepAxis& a) { return a.param == p; });
    }

    /// Every system size this config will run at.
    std::vector<int> sizes() const {
        for (const auto& a : sweeps)
            if (a.param == "L") {
                std::vector<int> out;
                for (const auto& q : a.values)
                    out.push_back(static_cast<int>(q.value));
                return out;
            }
        return {L};
    }
};

namespace config_detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline bool strip_suffix(std::string& s, std::string_view suffix) {
    if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
        s.erase(s.size() - suffix.size());
        s = trim(s);
        if (!s.empty() && s.back() == '*')
            s = trim(s.substr(0, s.size() - 1));
        return true;
    }
    return false;
}

inline double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+')
        ++first;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last || !std::isfinite(v))
        throw ConfigError(key, "expected a number, got '" + text + "'");
    return v;
}

enum Units : unsigned { plain = 0, pi = 1, tau_r = 2, tau = 4 };

inline Quantity parse_quantity(const std::string& key, const std::string& raw, unsigned allowed) {
    std::string s = trim(raw);
    Quantity q;
    if (strip_suffix(s, "tau_r")) {
        if (!(allowed & Units::tau_r))
            throw ConfigError(key, "tau_r units not accepted here");
        q.unit = Unit::tau_r;
    } else if (strip_suffix(s, "tau")) {
        if (!(allowed & Units::tau))
            throw ConfigError(key, "tau units not accepted here");
        q.unit = Unit::tau;
    }
    double scale = 1.0;
    if (strip_suffix(s, "pi")) {
        if (!(allowed & Units::pi))
            throw ConfigError(key, "pi literal not accepted here");
        scale = std::numbers::pi;
    }
    if (s.empty() || s == "+" || s == "-") {
        if (scale == 1.0 && q.unit == Unit::none)
            throw ConfigError(key, "empty value");
        q.value = (s == "-" ? -1.0 : 1.0) * scale;
        return q;
    }
    q.value = parse_double(key, s) * scale;
    return q;
}

inline long long parse_integer(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        throw ConfigError(key, "expected an integer, got '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "yes" || s == "1" || s == "on")
        return true;
    if (s == "false" || s == "no" || s == "0" || s == "off")
        return false;
    throw ConfigError(key, "expected true or false, got '" + s + "'");
}

// numeric keys that may be swept, with the units they accept
struct NumericKey {
    const char* name;
    unsigned units;
    bool integer;
};

inline constexpr std::array<NumericKey, 14> numeric_keys{{
    {"L", Units::plain, true},
    {"theta", Units::pi, false},
    {"epsilon", Units::pi, false},
    {"tau", Units::pi | Units::tau_r, false},
    {"pulse_width", Units::tau | Units::tau_r, false},
    {"n_periods", Units::plain, true},
    {"nnn_V2", Units::plain, false},
    {"h0", Units::plain, false},
    {"n_max", Units::plain, true},
    {"Omega", Units::plain, false},
    {"V1", Units::plain, false},
    {"V2", Units::plain, false},
    {"delta", Units::plain, false},
    {"tau_r", Units::pi, false},
}};

inline const NumericKey* find_numeric(std::string_view key) {
    for (const auto& k : numeric_keys)
        if (key == k.name)
            return &k;
    return nullptr;
}

inline Quantity parse_numeric(const NumericKey& k, const std::string& raw) {
    if (k.integer)
        return {static_cast<double>(parse_integer(k.name, raw)), Unit::none};
    return parse_quantity(k.name, raw, k.units);
}

} // namespace config_detail

/// Set one numeric parameter; shared by the parser and the sweep driver.
inline void apply_parameter(ExperimentConfig& c, const std::string& key, const Quantity& q) {
    const auto as_int = [&] {
        if (q.value != std::floor(q.value) || std::abs(q.value) > 1e9)
            throw ConfigError(key, "expected an integer");
        return static_cast<int>(q.value);
    };
    if (key == "L")
        c.L = as_int();
    else if (key == "theta")
        c.drive.theta = q.value;
    else if (key == "epsilon")
        c.drive.theta = std::numbers::pi - q.value;
    else if (key == "tau")
        c.tau = q;
    else if (key == "pulse_width")
        c.pulse_width = q;
    else if (key == "n_periods")
        c.drive.n_periods = as_int();
    else if (key == "nnn_V2")
        c.drive.nnn_V2 = q.value;
    else if (key == "h0")
        c.drive.deformation.h0 = q.value;
    else if (key == "n_max")
        c.drive.deformation.n_max = as_int();
    else if (key == "Omega")
        c.drive.rydberg.Omega = q.value;
    else if (key == "V1")
        c.drive.rydberg.V1 = q.value;
    else if (key == "V2")
        c.drive.rydberg.V2 = q.value;
    else if (key == "delta")
        c.drive.rydberg.delta = q.value;
    else if (key == "tau_r")
        c.tau_r = q.value;
    else
        throw ConfigError(key, "not a numeric parameter");
}

inline std::optional<Experiment> parse_experiment_name(std::string_view name) {
    for (const auto& i : experiment_table)
        if (name == i.name)
            return i.id;
    return std::nullopt;
}

namespace config_detail {

inline SweepAxis parse_sweep(const std::string& raw) {
    std::istringstream is(raw);
    std::vector<std::string> words;
    for (std::string w; is >> w;)
        words.push_back(w);
    if (words.empty())
        throw ConfigError("sweep", "missing parameter name");
    const NumericKey* k = find_numeric(words[0]);
    if (!k || words[0] == "tau_r")
        throw ConfigError("sweep", "cannot sweep '" + words[0] + "'");
    SweepAxis axis{words[0], {}};
    const std::string field = "sweep " + words[0];
    if (words.size() == 2) {
        std::string list = words[1];
        std::size_t pos = 0;
        while (pos <= list.size()) {
            const auto comma = list.find(',', pos);
            const std::string item = list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (trim(item).empty())
                throw ConfigError(field, "empty list entry");
            axis.values.push_back(parse_numeric(*k, item));
            if (comma == std::string::npos)
                break;
            pos = comma + 1;
        }
    } else if (words.size() == 4) {
        const Quantity a = parse_numeric(*k, words[1]), b = parse_numeric(*k, words[2]), h = parse_numeric(*k, words[3]);
        if (a.unit != b.unit || (h.unit != a.unit && h.unit != Unit::none))
            throw ConfigError(field, "range ends and step must share units");
        if (!(h.value > 0.0))
            throw ConfigError(field, "step must be positive");
        if (b.value < a.value)
            throw ConfigError(field, "empty range");
        const double span = (b.value - a.value) / h.value;
        if (span > 1e6)
            throw ConfigError(field, "too many points");
        const auto n = static_cast<long long>(std::floor(span + 1e-9));
        for (long long i = 0; i <= n; ++i)
            axis.values.push_back({a.value + static_cast<double>(i) * h.value, a.unit});
    } else {
        throw ConfigError(field, "expected 'param start stop step' or 'param v1,v2,...'");
    }
    if (axis.values.empty())
        throw ConfigError(field, "empty sweep");
    return axis;
}

inline void apply_defaults(ExperimentConfig& c, const std::set<std::string>& given) {
    const auto has = [&](const char* k) { return given.count(k) > 0; };
    const auto set_if = [&](const char* k, auto&& f) {
        if (!has(k))
            f();
    };
    const double pi = std::numbers::pi;
    auto& d = c.drive;
    switch (c.experiment) {
    case Experiment::echo_scan:
        set_if("tau", [&] { c.tau = {0.993 / 2, Unit::tau_r}; });
        set_if("n_periods", [&] { d.n_periods = 400; });
        if (c.sweeps.empty())
            c.sweeps.push_back(parse_sweep("theta 0.7pi 1.3pi 0.05pi"));
        break;
    case Experiment::tau_scan:
        set_if("theta", [&] { d.theta = 0.9 * pi; });
        set_if("n_periods", [&] { d.n_periods = 400; });
        set_if("substeps", [&] { c.substeps = 20; });
        if (c.sweeps.empty())
            c.sweeps.push_back(parse_sweep("tau 0.05tau_r 1tau_r 0.05tau_r"));
        break;
    case Experiment::nnn_scan:
        set_if("hamiltonian", [&] { d.hamiltonian = HamiltonianKind::pxp_nnn; });
        set_if("theta", [&] { d.theta = 0.9 * pi; });
        set_if("tau", [&] { c.tau = {0.993 / 2, Unit::tau_r}; });
        set_if("n_periods", [&] { d.n_periods = 400; });
        set_if("substeps", [&] { c.substeps = 20; });
        if (c.sweeps.empty())
            c.sweeps.push_back(parse_sweep("nnn_V2 0 0.5 0.05"));
        break;
    case Experiment::pairing:
        set_if("theta", [&] { d.theta = pi - 1.0; });
        if (c.sweeps.empty())
            c.sweeps.push_back(parse_sweep("tau 0.05tau_r 0.95tau_r 0.05tau_r"));
        break;
    case Experiment::splitting:
        set_if("theta", [&] { d.theta = pi; });
        if (c.sweeps.empty())
            c.sweeps.push_back(parse_sweep("L 8,10,12,14,16"));
        break;
    case Experiment::bloch: // dynamics under the plain chain; the deformation only shapes the subspace
        set_if("tau", [&] { c.tau = {0.45, Unit::tau_r}; });
        set_if("n_periods", [&] { d.n_periods = 2; });
        set_if("substeps", [&] { c.substeps = 20; });
        break;
    case Experiment::timescales:
        set_if("hamiltonian", [&] { d.hamiltonian = HamiltonianKind::rydberg; });
        set_if("theta", [&] { d.theta = 1.1 * pi; });
        set_if("tau", [&] { c.tau = {0.993 / 2, Unit::tau_r}; });
        set_if("n_periods", [&] { d.n_periods = 2000; });
        break;
    case Experiment::ghz:
        set_if("hamiltonian", [&] { d.hamiltonian = HamiltonianKind::rydberg; });
        set_if("theta", [&] { d.theta = 1.1 * pi; });
        set_if("n_periods", [&] { d.n_periods = 3000; });
        break;
    case Experiment::correlator:
        set_if("theta", [&] { d.theta = 0.9 * pi; });
        break;
    case Experiment::custom:
        set_if("n_periods", [&] { d.n_periods = 100; });
        break;
    }
}

inline bool needs_neel(const ExperimentConfig& c) {
    return !(c.experiment == Experiment::custom && (c.state == "vacuum" || c.state == "random"));
}

inline void check_size(const ExperimentConfig& c, int L) {
    const bool full = c.drive.hamiltonian == HamiltonianKind::rydberg;
    const int lo = 2, hi = full ? 16 : 26;
    if (L < lo || L > hi)
        throw ConfigError("L", "L=" + std::to_string(L) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                   "] for this model");
    if (needs_neel(c) && L % 2 != 0)
        throw ConfigError("L", "L=" + std::to_string(L) + " is odd but the experiment starts from a Neel state");
    if (c.state == "z4" && L % 4 != 0)
        throw ConfigError("L", "period-4 state needs L divisible by 4");
    if (c.experiment == Experiment::bloch && full)
        throw ConfigError("hamiltonian", "the scar subspace needs a blockaded model");
}

} // namespace config_detail

/// Parse, default and range-check a configuration.
inline ExperimentConfig validate_config(const std::string& text) {
    using namespace config_detail;
    ExperimentConfig c;
    std::set<std::string> given;
    std::optional<std::string> experiment_name;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    std::optional<double> theta_given, epsilon_given;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno), "missing key");
        if (key != "sweep" && !given.insert(key).second)
            throw ConfigError(key, "given twice");
        c.echo.emplace_back(key, value);

        if (key == "sweep") {
            SweepAxis a = parse_sweep(value);
            if (c.sweeps_over(a.param))
                throw ConfigError("sweep " + a.param, "swept twice");
            c.sweeps.push_back(std::move(a));
        } else if (key == "experiment") {
            const auto e = parse_experiment_name(value);
            if (!e)
                throw ConfigError(key, "unknown experiment '" + value + "'");
            c.experiment = *e;
            experiment_name = value;
        } else if (const NumericKey* k = find_numeric(key)) {
            const Quantity q = parse_numeric(*k, value);
            if (key == "theta")
                theta_given = q.value;
            if (key == "epsilon")
                epsilon_given = q.value;
            apply_parameter(c, key, q);
        } else if (key == "boundary") {
            if (value == "periodic")
                c.boundary = Boundary::periodic;
            else if (value == "open")
                c.boundary = Boundary::open;
            else
                throw ConfigError(key, "expected periodic or open");
        } else if (key == "hamiltonian") {
            if (value == "pxp")
                c.drive.hamiltonian = HamiltonianKind::pxp;
            else if (value == "deformed-pxp")
                c.drive.hamiltonian = HamiltonianKind::deformed_pxp;
            else if (value == "pxp+nnn")
                c.drive.hamiltonian = HamiltonianKind::pxp_nnn;
            else if (value == "rydberg")
                c.drive.hamiltonian = HamiltonianKind::rydberg;
            else
                throw ConfigError(key, "expected pxp, deformed-pxp, pxp+nnn or rydberg");
        } else if (key == "pulse") {
            if (value == "delta")
                c.drive.pulse = PulseShape::delta;
            else if (value == "finite-width")
                c.drive.pulse = PulseShape::finite_width;
            else
                throw ConfigError(key, "expected delta or finite-width");
        } else if (key == "amplitude") {
            if (value == "calibrated")
                c.drive.amplitude = AmplitudeMode::calibrated;
            else if (value == "raw")
                c.drive.amplitude = AmplitudeMode::raw;
            else
                throw ConfigError(key, "expected calibrated or raw");
        } else if (key == "state") {
            if (value != "z2" && value != "z2prime" && value != "z4" && value != "vacuum" && value != "random")
                throw ConfigError(key, "expected z2, z2prime, z4, vacuum or random");
            c.state = value;
        } else if (key == "substeps") {
            const auto v = parse_integer(key, value);
            if (v < 1 || v > 10000)
                throw ConfigError(key, "must be in [1, 10000]");
            c.substeps = static_cast<int>(v);
        } else if (key == "n_T") {
            const auto v = parse_integer(key, value);
            if (v < 2 || v > 100000)
                throw ConfigError(key, "must be in [2, 100000]");
            c.n_T = static_cast<int>(v);
        } else if (key == "band") {
            c.band = parse_double(key, value);
            if (!(c.band > 0.0 && c.band <= 1.0))
                throw ConfigError(key, "must be in (0, 1]");
        } else if (key == "selection") {
            if (value == "lowest")
                c.selection = DoubletSelection::lowest;
            else if (value == "cat-overlap")
                c.selection = DoubletSelection::cat_overlap;
            else
                throw ConfigError(key, "expected lowest or cat-overlap");
        } else if (key == "sx_norm") {
            if (value == "calibrated")
                c.sx_norm = SxNormalization::calibrated;
            else if (value == "literal")
                c.sx_norm = SxNormalization::literal;
            else
                throw ConfigError(key, "expected calibrated or literal");
        } else if (key == "sectors") {
            c.sectors = parse_bool(key, value);
        } else if (key == "output") {
            c.output = value;
        } else if (key == "spectrum") {
            c.spectrum = value;
        } else if (key == "workers") {
            const auto v = parse_integer(key, value);
            if (v < 1 || v > 1024)
                throw ConfigError(key, "must be in [1, 1024]");
            c.workers = static_cast<int>(v);
        } else if (key == "seed") {
            const auto v = parse_integer(key, value);
            if (v < 0)
                throw ConfigError(key, "must be non-negative");
            c.seed = static_cast<std::uint64_t>(v);
        } else if (key == "format") {
            if (value == "csv")
                c.format = OutputFormat::csv;
            else if (value == "jsonl")
                c.format = OutputFormat::jsonl;
            else
                throw ConfigError(key, "expected csv or jsonl");
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
    if (!experiment_name)
        throw ConfigError("experiment", "missing");
    if (theta_given && epsilon_given && std::abs(std::numbers::pi - *epsilon_given - *theta_given) > 1e-12)
        throw ConfigError("epsilon", "inconsistent with theta (epsilon = pi - theta)");
    if (epsilon_given)
        given.insert("theta");
    if (c.sweeps_over("theta") && c.sweeps_over("epsilon"))
        throw ConfigError("sweep", "theta and epsilon are the same axis");

    apply_defaults(c, given);

    if (!given.count("L") && !c.sweeps_over("L"))
        c.L = c.drive.hamiltonian == HamiltonianKind::rydberg ? 10 : 16;
    for (int L : c.sizes())
        check_size(c, L);
    if (c.drive.pulse == PulseShape::finite_width && c.pulse_width.unit == Unit::tau &&
        !(c.pulse_width.value > 0.0 && c.pulse_width.value < 1.0))
        throw ConfigError("pulse_width", "must be a fraction of tau in (0, 1)");
    if (c.drive.n_periods < 0)
        throw ConfigError("n_periods", "must be non-negative");
    if (c.tau_r && !(*c.tau_r > 0.0))
        throw ConfigError("tau_r", "must be positive");
    if (c.tau.unit == Unit::tau)
        throw ConfigError("tau", "cannot be given in units of itself");
    if (c.experiment == Experiment::splitting && c.sizes().size() < 2)
        throw ConfigError("sweep", "splitting needs at least two sizes");
    if ((c.experiment == Experiment::echo_scan || c.experiment == Experiment::tau_scan ||
         c.experiment == Experiment::nnn_scan) && c.drive.n_periods < 4)
        throw ConfigError("n_periods", "spectral weights need at least 4 periods");
    if (c.experiment == Experiment::nnn_scan && c.drive.hamiltonian != HamiltonianKind::pxp_nnn)
        throw ConfigError("hamiltonian", "nnn-scan runs on pxp+nnn");
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return validate_config(os.str());
}

} // namespace dtc

#endif // DTC_CONFIG_HPP
