#ifndef DTC_EXPERIMENT_HPP
#define DTC_EXPERIMENT_HPP

// Sweep driver behind the `simulate` tool. Each sweep point is independent; points run on a
// small thread pool and are collected by index, so output order never depends on scheduling.

#include <dtc/config.hpp>
#include <dtc/dynamics.hpp>
#include <dtc/error.hpp>
#include <dtc/hilbert.hpp>
#include <dtc/observables.hpp>
#include <dtc/prethermal.hpp>
#include <dtc/scars.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace dtc {

inline constexpr const char* version_string = "0.1.0";

struct SweepResult {
    std::vector<std::string> columns; // sweep params, observables, then "error"
    std::size_t sweep_columns = 0;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> errors; // one per row, empty when the point succeeded
    std::vector<std::pair<std::string, std::string>> metadata;
    double wall_time = 0.0;

    std::size_t error_rows() const {
        return static_cast<std::size_t>(std::count_if(errors.begin(), errors.end(), [](const auto& e) { return !e.empty(); }));
    }

    static std::string format_number(double v) {
        if (std::isnan(v))
            return "nan";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return buf;
    }

    static std::string csv_escape(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos)
            return s;
        std::string out = "\"";
        for (char ch : s) {
            if (ch == '"')
                out += '"';
            out += ch == '\n' ? ' ' : ch;
        }
        return out + '"';
    }

    void write_csv(std::ostream& os, bool with_wall_time = true) const {
        for (const auto& [k, v] : metadata)
            os << "# " << k << '=' << v << '\n';
        if (with_wall_time)
            os << "# wall_time_s=" << format_number(wall_time) << '\n';
        for (std::size_t c = 0; c < columns.size(); ++c)
            os << (c ? "," : "") << columns[c];
        os << '\n';
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < rows[r].size(); ++c)
                os << (c ? "," : "") << format_number(rows[r][c]);
            os << ',' << csv_escape(errors[r]) << '\n';
        }
    }

    void write_jsonl(std::ostream& os, bool with_wall_time = true) const {
        nlohmann::ordered_json meta;
        for (const auto& [k, v] : metadata)
            meta[k] = v;
        if (with_wall_time)
            meta["wall_time_s"] = wall_time;
        os << nlohmann::ordered_json{{"metadata", meta}}.dump() << '\n';
        for (std::size_t r = 0; r < rows.size(); ++r) {
            nlohmann::ordered_json row;
            for (std::size_t c = 0; c < rows[r].size(); ++c) {
                const double v = rows[r][c];
                if (std::isnan(v))
                    row[columns[c]] = nullptr;
                else
                    row[columns[c]] = v;
            }
            if (!errors[r].empty())
                row["error"] = errors[r];
            os << row.dump() << '\n';
        }
    }
};

/// Revival periods keyed by model; filled lazily and shared between workers.
class TauRCache {
public:
    double get(const ExperimentConfig& c, int L) {
        DriveSpec spec = c.drive;
        if (spec.hamiltonian == HamiltonianKind::pxp_nnn) // tau_r refers to the unperturbed chain
            spec.hamiltonian = HamiltonianKind::pxp;
        std::ostringstream key;
        key << std::setprecision(17) << to_string(spec.hamiltonian) << ' ' << L << ' '
            << (c.boundary == Boundary::periodic ? 'p' : 'o');
        if (spec.hamiltonian == HamiltonianKind::deformed_pxp)
            key << ' ' << spec.deformation.h0 << ' ' << spec.deformation.n_max;
        if (spec.hamiltonian == HamiltonianKind::rydberg)
            key << ' ' << spec.rydberg.Omega << ' ' << spec.rydberg.V1 << ' ' << spec.rydberg.V2 << ' '
                << spec.rydberg.delta;
        {
            std::lock_guard lock(mutex_);
            if (auto it = values_.find(key.str()); it != values_.end())
                return it->second;
        }
        const Model m = make_model(L, spec, c.boundary);
        const double t = calibrate_tau_r(m.H, density_wave_state(*m.basis, 2, 0), 80.0);
        std::lock_guard lock(mutex_);
        values_.emplace(key.str(), t);
        return t;
    }

private:
    std::mutex mutex_;
    std::map<std::string, double> values_;
};

/// One sweep point with every quantity resolved to absolute units.
struct ResolvedPoint {
    ExperimentConfig config;
    int L = 0;
    DriveSpec drive;
    double tau_r = std::numeric_limits<double>::quiet_NaN();
};

inline ExperimentConfig point_config(const ExperimentConfig& c, std::size_t index, std::vector<double>* swept = nullptr) {
    ExperimentConfig p = c;
    std::size_t stride = c.points();
    for (const auto& axis : c.sweeps) {
        stride /= axis.values.size();
        const Quantity& q = axis.values[(index / stride) % axis.values.size()];
        apply_parameter(p, axis.param, q);
        if (swept)
            swept->push_back(q.value);
    }
    return p;
}

inline ResolvedPoint resolve_point(const ExperimentConfig& p, TauRCache& cache) {
    ResolvedPoint r;
    r.config = p;
    r.L = p.L;
    r.drive = p.drive;
    const bool need_tau_r = p.tau.unit == Unit::tau_r || p.pulse_width.unit == Unit::tau_r ||
                            p.experiment == Experiment::tau_scan || p.experiment == Experiment::pairing ||
                            (p.experiment == Experiment::bloch && p.sx_norm == SxNormalization::literal);
    if (p.tau_r)
        r.tau_r = *p.tau_r;
    else if (need_tau_r)
        r.tau_r = cache.get(p, p.L);
    r.drive.tau = p.tau.unit == Unit::tau_r ? p.tau.value * r.tau_r : p.tau.value;
    if (r.drive.pulse == PulseShape::finite_width) {
        switch (p.pulse_width.unit) {
        case Unit::tau: r.drive.pulse_width = p.pulse_width.value * r.drive.tau; break;
        case Unit::tau_r: r.drive.pulse_width = p.pulse_width.value * r.tau_r; break;
        case Unit::none: r.drive.pulse_width = p.pulse_width.value; break;
        }
    }
    r.drive.validate();
    return r;
}

inline StateVector initial_state(const Basis& b, const std::string& name, std::uint64_t seed) {
    if (name == "z2")
        return density_wave_state(b, 2, 0);
    if (name == "z2prime")
        return density_wave_state(b, 2, 1);
    if (name == "z4")
        return density_wave_state(b, 4, 0);
    if (name == "vacuum")
        return b.basis_state(0);
    if (name == "random") {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        StateVector v(static_cast<Eigen::Index>(b.dim()));
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double re = g(rng);
            const double im = g(rng);
            v(i) = Complex(re, im);
        }
        return v / v.norm();
    }
    throw ModelError("unknown state " + name);
}

namespace experiment_detail {

using Rows = std::vector<std::vector<double>>;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

inline std::vector<double> stroboscopic(const TrajectoryRecord& rec, const std::string& column, double tau) {
    const auto& x = rec.column(column);
    std::vector<double> out;
    for (std::size_t i = 1; i < rec.size(); ++i)
        if (std::abs(rec.times[i] - rec.periods[i] * tau) < 1e-9 * tau)
            out.push_back(x[i]);
    return out;
}

inline Sampling sampling_for(const ExperimentConfig& c) {
    return c.substeps > 1 ? Sampling::micromotion(c.substeps) : Sampling::stroboscopic();
}

// f2 of the imbalance and the time-averaged half-chain entropy from one start state
inline std::pair<double, double> plateau_point(const Model& m, const DriveSpec& spec, const StateVector& psi0,
                                               const ExperimentConfig& c) {
    const FloquetDrive drive(m, spec);
    const TrajectoryRecord rec = run_drive(
        drive, psi0, {expectation_observable("I", build_imbalance(*m.basis)), entropy_observable("S_ent", m.basis)},
        sampling_for(c));
    const auto x = stroboscopic(rec, "I", spec.tau);
    return {subharmonic_weight(x, spec.tau), time_averaged_entropy(rec, "S_ent")};
}

} // namespace experiment_detail

/// Observable column names for an experiment (sweep columns excluded).
inline std::vector<std::string> observable_columns(const ExperimentConfig& c) {
    switch (c.experiment) {
    case Experiment::echo_scan: {
        std::vector<std::string> cols{"tau", "f2_z2", "S_avg_z2"};
        const auto sizes = c.sizes();
        if (std::all_of(sizes.begin(), sizes.end(), [](int L) { return L % 4 == 0; })) {
            cols.push_back("f2_z4");
            cols.push_back("S_avg_z4");
        }
        return cols;
    }
    case Experiment::tau_scan:
    case Experiment::nnn_scan: return {"tau", "tau_r", "f2", "band_weight", "S_avg"};
    case Experiment::pairing: return {"tau", "tau_r", "top_pair_gap", "top_pair_weight", "involution_defect"};
    case Experiment::splitting: return {"tau", "delta_E", "gap", "cat_overlap", "log_delta_E"};
    case Experiment::bloch: return {"t", "x", "y", "z", "parity_of_period"};
    case Experiment::timescales:
        return {"tau", "T_s", "T_b", "T_g", "T_g_dyn", "delta_E", "splitting", "beat_power_ratio"};
    case Experiment::ghz: return {"period", "t", "ghz_fidelity", "qfi", "qfi_normalized", "imbalance"};
    case Experiment::correlator: return {"q", "omega", "re", "im", "abs"};
    case Experiment::custom: return {"t", "period", "I", "F", "S_ent"};
    }
    return {};
}

struct PointOutput {
    experiment_detail::Rows rows;
    std::string side; // pairing spectrum rows
};

inline PointOutput run_point(const ResolvedPoint& p) {
    using namespace experiment_detail;
    const ExperimentConfig& c = p.config;
    const DriveSpec& spec = p.drive;
    const Model m = make_model(p.L, spec, c.boundary);
    PointOutput out;
    switch (c.experiment) {
    case Experiment::echo_scan: {
        auto [f2, s] = plateau_point(m, spec, density_wave_state(*m.basis, 2, 0), c);
        std::vector<double> row{spec.tau, f2, s};
        if (observable_columns(c).size() > 3) {
            auto [f4, s4] = plateau_point(m, spec, density_wave_state(*m.basis, 4, 0), c);
            row.push_back(f4);
            row.push_back(s4);
        }
        out.rows.push_back(row);
        break;
    }
    case Experiment::tau_scan:
    case Experiment::nnn_scan: {
        const FloquetDrive drive(m, spec);
        const TrajectoryRecord rec =
            run_drive(drive, initial_state(*m.basis, c.state, c.seed),
                      {expectation_observable("I", build_imbalance(*m.basis)), entropy_observable("S_ent", m.basis)},
                      sampling_for(c));
        const auto x = stroboscopic(rec, "I", spec.tau);
        const double w0 = std::numbers::pi / spec.tau;
        out.rows.push_back({spec.tau, p.tau_r, subharmonic_weight(x, spec.tau), band_weight(x, spec.tau, w0, c.band * w0),
                            time_averaged_entropy(rec, "S_ent")});
        break;
    }
    case Experiment::pairing: {
        const auto blocks = build_effective_blocks(m, spec.tau, c.epsilon(), c.sectors);
        const PairingReport rep = pairing_report(blocks, density_wave_state(*m.basis, 2, 0));
        std::ostringstream side;
        side << std::setprecision(12);
        for (std::size_t i = 0; i < rep.quasi_energies.size(); ++i)
            side << rep.tau << ',' << rep.quasi_energies[i] << ',' << rep.overlaps[i] << '\n';
        out.side = side.str();
        out.rows.push_back({spec.tau, p.tau_r, rep.top_pair_gap, rep.top_pair_weight(), blocks[0].involution_defect});
        break;
    }
    case Experiment::splitting: {
        const GroundManifold g = ground_manifold(build_effective_blocks(m, spec.tau, 0.0, c.sectors), c.selection);
        out.rows.push_back({spec.tau, g.delta_E, g.gap, g.cat_overlap, g.delta_E > 0 ? std::log(g.delta_E) : nan});
        break;
    }
    case Experiment::bloch: {
        const ScarSubspace s = build_scar_subspace(m.basis, spec.deformation, c.sx_norm, p.tau_r);
        const FloquetDrive drive(m, spec);
        for (const auto& b : bloch_trajectory(drive, initial_state(*m.basis, c.state, c.seed), s, sampling_for(c)))
            out.rows.push_back({b.t, b.x, b.y, b.z, static_cast<double>(b.period % 2)});
        break;
    }
    case Experiment::timescales: {
        const StateVector z2 = density_wave_state(*m.basis, 2, 0);
        const FloquetDrive drive(m, spec);
        const auto rec = run_drive(drive, z2, {fidelity_observable("F", z2)});
        const FloquetDoublet d = floquet_doublet(m, spec, c.sectors);
        const TimescaleReport t = extract_timescales(rec.column("F"), spec.tau, d);
        out.rows.push_back({spec.tau, t.T_s, t.T_b.value_or(nan), t.T_g, t.T_g_dyn.value_or(nan), t.delta_E, d.splitting,
                            t.beat_power_ratio});
        break;
    }
    case Experiment::ghz: {
        const FloquetDrive drive(m, spec);
        const OperatorMatrix I = build_imbalance(*m.basis);
        StateVector psi = initial_state(*m.basis, c.state, c.seed);
        for (int n = 0; n <= spec.n_periods; ++n) {
            if (n > 0)
                psi = drive.step(psi);
            // normalized to the GHZ value L^2 of the unnormalized generator
            const double q = quantum_fisher_information(*m.basis, psi);
            out.rows.push_back({static_cast<double>(n), n * spec.tau, ghz_fidelity(*m.basis, psi), q,
                                q / (double(p.L) * p.L), I.expectation(psi).real()});
        }
        break;
    }
    case Experiment::correlator: {
        const auto blocks = build_effective_blocks(m, spec.tau, c.epsilon(), c.sectors);
        const GroundManifold g = ground_manifold(blocks, c.selection);
        const Level& lv = g.levels[g.first];
        const StateVector psi0 = blocks[lv.block].from_working(lv.vector);
        const FloquetDrive drive(m, spec);
        const CorrelatorGrid grid = spatiotemporal_correlator(
            *m.basis, psi0, [&drive](const StateVector& s) { return drive.step_inverse(s); }, c.n_T);
        for (int q = 0; q < grid.L; ++q)
            for (int w = 0; w < grid.n_T; ++w) {
                const Complex v = grid.values(q, w);
                out.rows.push_back({grid.qs[static_cast<std::size_t>(q)], grid.omegas[static_cast<std::size_t>(w)],
                                    v.real(), v.imag(), std::abs(v)});
            }
        break;
    }
    case Experiment::custom: {
        const StateVector psi0 = initial_state(*m.basis, c.state, c.seed);
        const FloquetDrive drive(m, spec);
        const auto rec = run_drive(drive, psi0,
                                   {expectation_observable("I", build_imbalance(*m.basis)), fidelity_observable("F", psi0),
                                    entropy_observable("S_ent", m.basis)},
                                   sampling_for(c));
        for (std::size_t i = 0; i < rec.size(); ++i)
            out.rows.push_back({rec.times[i], static_cast<double>(rec.periods[i]), rec.series[0][i], rec.series[1][i],
                                rec.series[2][i]});
        break;
    }
    }
    return out;
}

/// Run `job(i)` for i in [0, n) on `workers` threads; jobs must only touch slot i of their output.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& job) {
    const auto w = static_cast<std::size_t>(std::max(1, workers));
    if (w == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(w, n); ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
                job(i);
        });
    for (auto& th : pool)
        th.join();
}

/// Run every sweep point; a failing point becomes an error row carrying its parameters.
inline SweepResult run_experiment(const ExperimentConfig& c, std::ostream* spectrum = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    SweepResult res;
    for (const auto& a : c.sweeps) // swept values are reported in the units they were given
        switch (a.values.front().unit) {
        case Unit::none: res.columns.push_back(a.param); break;
        case Unit::tau_r: res.columns.push_back(a.param + "_over_tau_r"); break;
        case Unit::tau: res.columns.push_back(a.param + "_over_tau"); break;
        }
    res.sweep_columns = res.columns.size();
    const auto obs = observable_columns(c);
    res.columns.insert(res.columns.end(), obs.begin(), obs.end());
    res.columns.push_back("error");
    for (std::size_t i = 0; i + 1 < res.columns.size(); ++i)
        for (std::size_t j = i + 1; j + 1 < res.columns.size(); ++j)
            if (res.columns[i] == res.columns[j])
                res.columns[j] = "out_" + res.columns[j]; // swept tau vs resolved tau

    res.metadata.emplace_back("experiment", experiment_info(c.experiment).name);
    res.metadata.emplace_back("version", version_string);
    for (const auto& [k, v] : c.echo)
        res.metadata.emplace_back("config." + k, v);

    const std::size_t n = c.points();
    std::vector<std::vector<double>> swept(n);
    std::vector<PointOutput> outputs(n);
    std::vector<std::string> errors(n);
    TauRCache cache;
    parallel_for(n, c.workers, [&](std::size_t i) {
        try {
            const ExperimentConfig p = point_config(c, i, &swept[i]);
            outputs[i] = run_point(resolve_point(p, cache));
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i].empty()) {
            std::vector<double> row = swept[i];
            row.resize(res.columns.size() - 1, experiment_detail::nan);
            res.rows.push_back(std::move(row));
            res.errors.push_back(errors[i]);
            continue;
        }
        for (const auto& r : outputs[i].rows) {
            std::vector<double> row = swept[i];
            row.insert(row.end(), r.begin(), r.end());
            res.rows.push_back(std::move(row));
            res.errors.emplace_back();
        }
        if (spectrum)
            *spectrum << outputs[i].side;
    }

    if (c.experiment == Experiment::splitting) {
        std::vector<int> sizes;
        std::vector<double> dE;
        const std::size_t L_col = static_cast<std::size_t>(
            std::find(res.columns.begin(), res.columns.end(), "L") - res.columns.begin());
        const std::size_t dE_col = static_cast<std::size_t>(
            std::find(res.columns.begin(), res.columns.end(), "delta_E") - res.columns.begin());
        for (std::size_t r = 0; r < res.rows.size(); ++r)
            if (res.errors[r].empty() && L_col < res.columns.size()) {
                sizes.push_back(static_cast<int>(res.rows[r][L_col]));
                dE.push_back(res.rows[r][dE_col]);
            }
        if (sizes.size() >= 2 && c.sweeps.size() == 1) {
            try {
                const SplittingFit f = fit_splitting(sizes, dE);
                res.metadata.emplace_back("fit.slope", SweepResult::format_number(f.slope));
                res.metadata.emplace_back("fit.intercept", SweepResult::format_number(f.intercept));
                res.metadata.emplace_back("fit.r2", SweepResult::format_number(f.r2));
            } catch (const std::exception& e) {
                res.metadata.emplace_back("fit.error", e.what());
            }
        }
    }
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

} // namespace dtc

#endif // DTC_EXPERIMENT_HPP
