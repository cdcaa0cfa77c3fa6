#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "entpulse/errors.hpp"
#include "entpulse/gaussian.hpp"
#include "entpulse/state_io.hpp"

namespace entpulse::cli {

namespace {

constexpr double oracle_agreement = 1e-6;
constexpr double oracle_leakage_tolerance = 1e-9;

constexpr std::string_view kRunKeys[] = {
    "much_greater_ratio", "soft_ratio", "include_decay", "kappa_dt",     "theta1",
    "theta2",             "t_max",      "t_step",        "r_list",       "seq_t1",
    "seq_kappa_T12",      "seq_swap_area", "oracle_r",   "oracle_dims"};

struct Globals {
    std::string config_path;
    std::string out_dir;
    std::optional<double> ratio;
    bool force = false;
};

std::string fixed(double value, int digits = 6) {
    std::ostringstream os;
    os << std::setprecision(digits) << value;
    return os.str();
}

std::string hz(double angular) { return fixed(units::linear(angular), 8) + " Hz"; }

KeyValueConfig load_raw(const Globals& g) {
    if (g.config_path.empty()) {
        return {};
    }
    return KeyValueConfig::load(g.config_path);
}

RunConfig load_config(const Globals& g, bool require_params) {
    RunConfig cfg = load_run_config(load_raw(g), require_params);
    if (g.ratio) {
        if (!(*g.ratio > 1.0)) {
            throw ConfigError("--ratio must be > 1");
        }
        cfg.much_greater_ratio = *g.ratio;
    }
    return cfg;
}

std::filesystem::path output_dir(const Globals& g) {
    std::filesystem::path dir = g.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(g.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw ConfigError("cannot create output directory '" + dir.string() + "'");
    }
    return dir;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    f << contents;
    f.close();
    if (!f) {
        throw ConfigError("write failed for '" + path.string() + "'");
    }
}

// ---------------------------------------------------------------------------

int cmd_validate(const Globals& g, std::ostream& out) {
    const RunConfig cfg = load_config(g, true);
    const PhysicalParams& p = *cfg.params;
    const Couplings c = coupling_constants(p);
    const RegimeReport report = validate_regime(p, c, cfg.much_greater_ratio, cfg.soft_ratio);
    out << format_report(report);
    out << "r = " << fixed(c.r, 10) << "\n";
    if (c.t_pi) {
        out << "Theta/2pi = " << hz(*c.theta_rate) << "\n";
        out << "T_pi = " << fixed(*c.t_pi * 1e6, 8) << " us\n";
    } else {
        out << "Theta undefined (r <= 1)\n";
    }
    return report.pass ? exit_ok : exit_physics;
}

int cmd_couplings(const Globals& g, std::ostream& out) {
    const RunConfig cfg = load_config(g, true);
    const Couplings c = coupling_constants(*cfg.params);
    out << "eta = " << fixed(c.eta, 10) << "\n";
    out << "|chi1|/2pi = " << hz(std::abs(c.chi1)) << ", arg chi1 = " << fixed(std::arg(c.chi1), 10)
        << " rad\n";
    out << "|chi2|/2pi = " << hz(std::abs(c.chi2)) << ", arg chi2 = " << fixed(std::arg(c.chi2), 10)
        << " rad\n";
    out << "r = " << fixed(c.r, 10) << "\n";
    out << "beta = " << fixed(c.beta, 10) << " rad\n";
    if (c.periodic()) {
        out << "Theta/2pi = " << hz(*c.theta_rate) << "\n";
        out << "T_pi = " << fixed(*c.t_pi * 1e6, 8) << " us\n";
        out << "mean photons per mode = " << fixed(*c.n_mean, 10) << "\n";
    } else {
        out << "Theta, T_pi, mean photons: undefined (r <= 1)\n";
    }
    return exit_ok;
}

int cmd_simulate(const Globals& g, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load_config(g, true);
    SimultaneousOptions opts;
    opts.force = g.force;
    opts.include_decay = cfg.include_decay;
    opts.much_greater_ratio = cfg.much_greater_ratio;
    opts.soft_ratio = cfg.soft_ratio;

    SimultaneousResult res = [&] {
        try {
            return run_simultaneous(*cfg.params, opts);
        } catch (const RegimeViolation&) {
            const Couplings c = coupling_constants(*cfg.params);
            err << format_report(validate_regime(*cfg.params, c, opts.much_greater_ratio,
                                                 opts.soft_ratio));
            throw;
        }
    }();
    const Couplings& c = res.couplings;
    const PulseDiagnostics& d = res.diagnostics;
    if (!res.regime.pass) {
        out << "warning: regime check failed; running because of --force\n";
    }
    if (cfg.include_decay) {
        out << "note: cavity decay enabled during the drive (non-normative run)\n";
    }
    out << "T_pi = " << fixed(d.t_pi * 1e6, 8) << " us\n";
    out << "r = " << fixed(c.r, 10) << "\n";
    out << "beta = " << fixed(c.beta, 10) << " rad\n";
    out << "mean photons per mode = " << fixed(*c.n_mean, 10) << "\n";
    out << "mean photons cav1 = " << fixed(d.mean_photons_cav1, 10) << "\n";
    out << "mean photons cav2 = " << fixed(d.mean_photons_cav2, 10) << "\n";
    out << "mean photons motion = " << fixed(d.mean_photons_motion, 10) << "\n";
    out << "E_N(cav1|cav2) = " << fixed(d.log_negativity, 10) << "\n";
    out << "Delta(X1-X2)^2 = " << fixed(d.epr_x, 10) << "\n";
    out << "Delta(P1+P2)^2 = " << fixed(d.epr_p, 10) << "\n";
    out << "EPR variance at theta1=theta2=-beta/2 = " << fixed(d.epr_best, 10) << "\n";
    out << "motion decorrelation norm = " << fixed(d.motion_decorrelation, 6) << "\n";

    if (!g.out_dir.empty()) {
        std::ostringstream dump;
        write_state(dump, res.final_state);
        const auto path = output_dir(g) / "simulate_state.txt";
        write_file(path, dump.str());
        out << "state written to " << path.string() << "\n";
    }
    return exit_ok;
}

std::string r_tag(double r) { return format_double(r); }

int cmd_fig3(const Globals& g, std::ostream& out) {
    const RunConfig cfg = load_config(g, false);
    const auto dir = output_dir(g);
    const auto traces =
        fig3_sweep(cfg.r_list, cfg.homodyne.kappa_dt, cfg.homodyne.t_grid);

    // Single writer after every trace is computed.
    for (const auto& trace : traces) {
        std::ostringstream csv;
        write_csv(csv, trace);
        write_file(dir / ("fig3_r" + r_tag(trace.r) + ".csv"), csv.str());
    }
    for (const auto& trace : traces) {
        const auto i = trace.argmin();
        out << "r=" << r_tag(trace.r) << "  min C=" << fixed(trace.c[i], 8)
            << " at kappa t=" << fixed(trace.times[i], 6);
        if (const auto cross = trace.first_crossing(0.5)) {
            out << "  C>0.5 from kappa t=" << fixed(*cross, 6);
        }
        out << "\n";
    }
    out << traces.size() << " traces written to " << dir.string() << "\n";
    return exit_ok;
}

int cmd_sequential(const Globals& g, std::ostream& out) {
    const RunConfig cfg = load_config(g, true);
    const PhysicalParams& p = *cfg.params;
    const Couplings c = coupling_constants(p);
    const double t1 = cfg.seq_t1.value_or(1.0 / std::abs(c.chi1));
    const double delay = cfg.seq_kappa_T12 / p.kappa;
    const SequentialResult res = run_sequential(p, t1, delay, cfg.seq_swap_area);
    out << "stage A: t1 = " << fixed(t1 * 1e6, 8) << " us (|chi1| t1 = "
        << fixed(std::abs(c.chi1) * t1, 8) << ")\n";
    out << "stage B: kappa T12 = " << fixed(cfg.seq_kappa_T12, 8)
        << ", extraction efficiency = " << fixed(res.extraction_efficiency, 12) << "\n";
    out << "stage C: swap area = " << fixed(res.swap_area, 10) << " rad, t2 = "
        << fixed(res.swap_time * 1e6, 8) << " us\n";
    out << "E_N(motion|cavity) after stage A = " << fixed(res.en_motion_cavity_stage_a, 10) << "\n";
    out << "E_N(pulse1|pulse2) = " << fixed(res.en_pulse1_pulse2, 10) << "\n";
    out << "E_N(pulse1|motion) after swap = " << fixed(res.en_pulse1_motion, 10) << "\n";
    out << "motion decorrelation norm = " << fixed(res.motion_decorrelation, 6) << "\n";
    return exit_ok;
}

struct OracleRow {
    std::string name;
    double gaussian;
    double fock;
};

int cmd_oracle_check(const Globals& g, std::ostream& out) {
    const RunConfig cfg = load_config(g, false);
    bool all_ok = true;
    for (double r : cfg.oracle_r) {
        if (!(r > 1.0)) {
            throw ProtocolUndefined("oracle r must be > 1");
        }
        const std::complex<double> chi1{1.0, 0.0};
        const std::complex<double> chi2{r, 0.0};
        const fock::Dims dims = cfg.oracle_dims.value_or(fock::suggested_dims(chi1, chi2));
        const PulseRun gauss = drive_pulse(chi1, chi2, 0.0);

        fock::PropagationOptions opts;
        opts.leakage_tolerance = oracle_leakage_tolerance;
        const auto h = fock::hamiltonian_matrix(chi1, chi2, dims);
        const auto prop = fock::propagate(fock::FockState::vacuum(dims), h, gauss.diagnostics.t_pi, opts);
        const fock::Observables obs = fock::observables(prop.state);

        std::vector<OracleRow> rows;
        const char* modes[] = {"cav1", "cav2", "motion"};
        for (int m = 0; m < 3; ++m) {
            rows.push_back({std::string("mean photons ") + modes[m],
                            mean_photons(gauss.final_state, modes[m]), obs.mean_photons(m)});
        }
        const char* quads[] = {"X1", "P1", "X2", "P2", "Xb", "Pb"};
        for (int i = 0; i < 6; ++i) {
            for (int j = i; j < 6; ++j) {
                rows.push_back({std::string("cov(") + quads[i] + "," + quads[j] + ")",
                                gauss.final_state.cov()(i, j), obs.covariance(i, j)});
            }
        }
        rows.push_back({"Delta(X1-X2)^2", gauss.diagnostics.epr_x, obs.epr_variance(0.0, 0.0)});
        rows.push_back({"Delta(P1+P2)^2", gauss.diagnostics.epr_p,
                        obs.epr_variance(units::pi / 2.0, -units::pi / 2.0)});

        out << "r = " << r_tag(r) << "  (|chi1| = 1, |chi2| = " << r_tag(r) << ", dims "
            << dims.cav1 << "x" << dims.cav2 << "x" << dims.motion << ", max leakage "
            << fixed(prop.max_leakage, 3) << ", Krylov steps " << prop.steps << ")\n";
        out << std::left << std::setw(18) << "observable" << std::right << std::setw(20)
            << "gaussian" << std::setw(20) << "fock" << std::setw(14) << "|diff|" << "\n";
        for (const auto& row : rows) {
            const double diff = std::abs(row.gaussian - row.fock);
            const bool ok = diff <= oracle_agreement;
            all_ok = all_ok && ok;
            out << std::left << std::setw(18) << row.name << std::right << std::setw(20)
                << fixed(row.gaussian, 12) << std::setw(20) << fixed(row.fock, 12)
                << std::setw(14) << fixed(diff, 3) << (ok ? "" : "  MISMATCH") << "\n";
        }
    }
    out << (all_ok ? "oracle-check: all |diff| <= 1e-6\n" : "oracle-check: MISMATCH above 1e-6\n");
    return all_ok ? exit_ok : exit_physics;
}

}  // namespace

std::vector<std::string_view> known_keys() {
    std::vector<std::string_view> keys(physical_param_keys().begin(), physical_param_keys().end());
    keys.insert(keys.end(), std::begin(kRunKeys), std::end(kRunKeys));
    return keys;
}

RunConfig load_run_config(const KeyValueConfig& raw, bool require_params) {
    const auto keys = known_keys();
    raw.reject_unknown(keys);

    RunConfig cfg;
    cfg.raw = raw;
    if (require_params) {
        cfg.params = params_from_config(raw);
    }
    cfg.much_greater_ratio = raw.get_double("much_greater_ratio").value_or(cfg.much_greater_ratio);
    if (!(cfg.much_greater_ratio > 1.0)) {
        throw ConfigError("much_greater_ratio must be > 1", raw.line_of("much_greater_ratio"));
    }
    cfg.soft_ratio = raw.get_double("soft_ratio").value_or(cfg.soft_ratio);
    if (!(cfg.soft_ratio > 0.0)) {
        throw ConfigError("soft_ratio must be > 0", raw.line_of("soft_ratio"));
    }
    if (const auto d = raw.get_double("include_decay")) {
        if (*d != 0.0 && *d != 1.0) {
            throw ConfigError("include_decay must be 0 or 1", raw.line_of("include_decay"));
        }
        cfg.include_decay = *d == 1.0;
    }

    cfg.homodyne.theta1 = raw.get_double("theta1").value_or(0.0);
    cfg.homodyne.theta2 = raw.get_double("theta2").value_or(0.0);
    cfg.homodyne.kappa_dt = raw.get_double("kappa_dt").value_or(0.1);
    const double t_max = raw.get_double("t_max").value_or(8.0);
    const double t_step = raw.get_double("t_step").value_or(0.02);
    try {
        cfg.homodyne.t_grid = uniform_grid(t_max, t_step);
        cfg.homodyne.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("homodyne settings: ") + e.what());
    }
    if (auto list = raw.get_list("r_list")) {
        cfg.r_list = std::move(*list);
    }

    cfg.seq_t1 = raw.get_double("seq_t1");
    if (cfg.seq_t1 && !(*cfg.seq_t1 > 0.0)) {
        throw ConfigError("seq_t1 must be > 0", raw.line_of("seq_t1"));
    }
    cfg.seq_kappa_T12 = raw.get_double("seq_kappa_T12").value_or(cfg.seq_kappa_T12);
    if (!(cfg.seq_kappa_T12 >= 0.0)) {
        throw ConfigError("seq_kappa_T12 must be >= 0", raw.line_of("seq_kappa_T12"));
    }
    cfg.seq_swap_area = raw.get_double("seq_swap_area").value_or(cfg.seq_swap_area);

    if (auto list = raw.get_list("oracle_r")) {
        cfg.oracle_r = std::move(*list);
    }
    if (auto dims = raw.get_list("oracle_dims")) {
        const int line = raw.line_of("oracle_dims");
        if (dims->size() != 3) {
            throw ConfigError("oracle_dims needs three values (cav1 cav2 motion)", line);
        }
        std::array<std::size_t, 3> d{};
        for (std::size_t i = 0; i < 3; ++i) {
            const double v = (*dims)[i];
            if (!(v >= 2.0) || v != std::floor(v)) {
                throw ConfigError("oracle_dims entries must be integers >= 2", line);
            }
            d[i] = static_cast<std::size_t>(v);
        }
        cfg.oracle_dims = fock::Dims{d[0], d[1], d[2]};
    }
    return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entangled light pulses from a trapped atom in a cavity", "entpulse"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "Flat key = value config file");
    app.add_option("--out", g.out_dir, "Output directory for CSV / state files");
    app.add_option("--ratio", g.ratio, "Factor used for '>>' in the regime check");
    app.add_flag("--force", g.force, "Run even when the regime check fails");
    bool version = false;
    app.add_flag("--version", version, "Print version to stderr");

    auto* validate = app.add_subcommand("validate", "Check the validity inequalities");
    auto* couplings = app.add_subcommand("couplings", "Print chi1, chi2 and derived rates");
    auto* simulate = app.add_subcommand("simulate", "Simultaneous entangled pulses at T_pi");
    auto* fig3 = app.add_subcommand("fig3", "Homodyne signal C(t) for a list of r values");
    auto* sequential = app.add_subcommand("sequential", "Sequential pulses via motional memory");
    auto* oracle = app.add_subcommand("oracle-check", "Gaussian engine vs truncated Fock oracle");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        if (version && args.size() == 1) {
            err << "entpulse 0.1.0\n";
            return exit_ok;
        }
        err << "error: " << e.what() << "\n" << app.help();
        return exit_usage;
    }
    if (version) {
        err << "entpulse 0.1.0\n";
    }

    try {
        if (validate->parsed()) return cmd_validate(g, out);
        if (couplings->parsed()) return cmd_couplings(g, out);
        if (simulate->parsed()) return cmd_simulate(g, out, err);
        if (fig3->parsed()) return cmd_fig3(g, out);
        if (sequential->parsed()) return cmd_sequential(g, out);
        if (oracle->parsed()) return cmd_oracle_check(g, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const ProtocolUndefined& e) {
        err << "error: protocol undefined: " << e.what() << "\n";
        return exit_usage;
    } catch (const RegimeViolation& e) {
        err << "error: " << e.what() << "\n";
        return exit_physics;
    } catch (const TruncationError& e) {
        err << "error: " << e.what() << "\n";
        return exit_physics;
    } catch (const DegenerateCoupling& e) {
        err << "error: " << e.what() << "\n";
        return exit_physics;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_physics;
    }
    return exit_usage;
}

}  // namespace entpulse::cli
