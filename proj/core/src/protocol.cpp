#include "entpulse/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>

#include "entpulse/errors.hpp"
#include "entpulse/state_io.hpp"

namespace entpulse {

namespace {

double theta_squared(std::complex<double> chi1, std::complex<double> chi2) {
    const double abs1 = std::abs(chi1);
    const double abs2 = std::abs(chi2);
    if (!(abs2 > abs1)) {
        throw ProtocolUndefined("entangled-pulse protocol needs |chi2| > |chi1| (r > 1)");
    }
    return (abs2 - abs1) * (abs2 + abs1);
}

// Second moment <q(theta)^2> style quadratic form, including the mean.
double second_moment(const GaussianState& s, const Vector& g) {
    const double m = g.dot(s.mean());
    return g.dot(s.cov() * g) + m * m;
}

Vector quadrature_vector(const GaussianState& s, const std::string& mode, double theta) {
    Vector g = Vector::Zero(s.mean().size());
    const auto k = static_cast<Eigen::Index>(2 * s.index_of(mode));
    g(k) = std::cos(theta);
    g(k + 1) = -std::sin(theta);
    return g;
}

GaussianState stage(const GaussianState& s, const ComplexMatrix& m, const ComplexMatrix& n,
                    double t) {
    const LinearDynamics dyn =
        dynamics_from_ladder(m, n, Vector::Zero(static_cast<Eigen::Index>(s.n_modes())));
    return evolve(s, dyn, t);
}

}  // namespace

PulseRun drive_pulse(std::complex<double> chi1, std::complex<double> chi2, double nbar_motion,
                     double kappa, bool include_decay) {
    const double theta = std::sqrt(theta_squared(chi1, chi2));
    const double t_pi = units::pi / theta;

    const GaussianState initial = vacuum({"cav1", "cav2"}).tensor(thermal(nbar_motion, "motion"));
    const LinearDynamics dyn = dynamics_from_couplings(chi1, chi2, kappa, include_decay);
    GaussianState final_state = evolve(initial, dyn, t_pi);

    PulseDiagnostics d;
    d.t_pi = t_pi;
    d.mean_photons_cav1 = mean_photons(final_state, "cav1");
    d.mean_photons_cav2 = mean_photons(final_state, "cav2");
    d.mean_photons_motion = mean_photons(final_state, "motion");
    const GaussianState pair = final_state.reduced({"cav1", "cav2"});
    d.log_negativity = log_negativity(pair, {"cav1"});
    d.epr_x = epr_variance(pair, "cav1", "cav2", 0.0, 0.0);
    d.epr_p = epr_variance(pair, "cav1", "cav2", units::pi / 2.0, -units::pi / 2.0);
    const double beta = std::arg(chi1) + std::arg(chi2);
    d.epr_best = epr_variance(pair, "cav1", "cav2", -beta / 2.0, -beta / 2.0);
    d.motion_decorrelation = decorrelation_norm(final_state, {"motion"}, {"cav1", "cav2"});
    return {std::move(final_state), d};
}

SimultaneousResult run_simultaneous(const PhysicalParams& params, const SimultaneousOptions& options) {
    const Couplings couplings = coupling_constants(params);
    RegimeReport regime =
        validate_regime(params, couplings, options.much_greater_ratio, options.soft_ratio);
    if (!couplings.periodic()) {
        throw ProtocolUndefined("r = |chi2/chi1| <= 1: no periodic solution, T_pi undefined");
    }
    if (!regime.pass && !options.force) {
        throw RegimeViolation("parameter regime check failed (use force to run anyway)");
    }
    PulseRun run = drive_pulse(couplings.chi1, couplings.chi2, params.nbar_motion, params.kappa,
                               options.include_decay);
    return {std::move(run.final_state), couplings, run.diagnostics, std::move(regime)};
}

void HomodyneSettings::validate() const {
    if (!(kappa_dt > 0.0 && kappa_dt <= 1.0)) {
        throw InvalidParameter("kappa_dt must lie in (0, 1]");
    }
    if (!std::isfinite(theta1) || !std::isfinite(theta2)) {
        throw InvalidParameter("local-oscillator phases must be finite");
    }
    if (t_grid.empty()) {
        throw InvalidParameter("time grid is empty");
    }
    for (double t : t_grid) {
        if (!std::isfinite(t) || t < 0.0) {
            throw InvalidParameter("time grid values must be finite and >= 0");
        }
    }
}

std::vector<double> uniform_grid(double t_max, double step) {
    if (!(step > 0.0) || !(t_max >= 0.0) || !std::isfinite(t_max)) {
        throw InvalidParameter("grid needs step > 0 and t_max >= 0");
    }
    const auto n = static_cast<std::size_t>(std::floor(t_max / step + 1e-9));
    std::vector<double> grid;
    grid.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        grid.push_back(static_cast<double>(i) * step);
    }
    return grid;
}

QuadratureMoments quadrature_moments(std::complex<double> chi1, std::complex<double> chi2,
                                     double theta1, double theta2) {
    const double theta2_rate = theta_squared(chi1, chi2);
    const double theta4 = theta2_rate * theta2_rate;
    const double s = std::norm(chi1) + std::norm(chi2);
    QuadratureMoments m;
    m.q1_sq = (s * s + 4.0 * std::norm(chi1 * chi2)) / theta4;
    m.q2_sq = m.q1_sq;
    m.q1q2 = (4.0 * chi1 * chi2 * s * std::polar(1.0, theta1 + theta2)).real() / theta4;
    return m;
}

QuadratureMoments quadrature_moments(const GaussianState& state, double theta1, double theta2) {
    const Vector g1 = quadrature_vector(state, "cav1", theta1);
    const Vector g2 = quadrature_vector(state, "cav2", theta2);
    QuadratureMoments m;
    m.q1_sq = second_moment(state, g1);
    m.q2_sq = second_moment(state, g2);
    m.q1q2 = g1.dot(state.cov() * g2) + g1.dot(state.mean()) * g2.dot(state.mean());
    return m;
}

double signal_weight(const QuadratureMoments& m, double kappa_dt, double kappa_t) {
    return kappa_dt * std::exp(-2.0 * kappa_t) * (m.q1_sq + m.q2_sq);
}

double signal_closed_form(const QuadratureMoments& m, double kappa_dt, double kappa_t) {
    const double r = signal_weight(m, kappa_dt, kappa_t);
    return 1.0 - r / (1.0 + r) * 2.0 * m.q1q2 / (m.q1_sq + m.q2_sq);
}

double signal_beam_splitter(const GaussianState& cavity_pair, double theta1, double theta2,
                            double kappa_dt, double kappa_t) {
    const GaussianState source = cavity_pair.reduced({"cav1", "cav2"});
    const GaussianState fields = source.tensor(vacuum({"free1", "free2"}));

    const double g2 = 2.0 * kappa_dt * std::exp(-2.0 * kappa_t);
    const double t = std::sqrt(g2 / (1.0 + g2));
    const double rr = std::sqrt(1.0 / (1.0 + g2));
    // Mode order (cav1, cav2, free1, free2); detected modes replace cav1, cav2.
    ComplexMatrix u = ComplexMatrix::Zero(4, 4);
    u(0, 0) = t;
    u(0, 2) = rr;
    u(1, 1) = t;
    u(1, 3) = rr;
    u(2, 0) = -rr;
    u(2, 2) = t;
    u(3, 1) = -rr;
    u(3, 3) = t;
    const GaussianState out = fields.transformed(ladder_to_quadrature(u, ComplexMatrix::Zero(4, 4)));

    const Vector q1 = quadrature_vector(out, "cav1", theta1);
    const Vector q2 = quadrature_vector(out, "cav2", theta2);
    const double var_diff = (q1 - q2).dot(out.cov() * (q1 - q2));
    const double var_ref = q1.dot(out.cov() * q1) + q2.dot(out.cov() * q2);
    return var_diff / var_ref;
}

std::size_t SignalTrace::argmin() const {
    if (c.empty()) {
        throw InvalidParameter("empty signal trace");
    }
    return static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
}

std::optional<double> SignalTrace::first_crossing(double level) const {
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] > level) {
            return times[i];
        }
    }
    return std::nullopt;
}

double SignalTrace::longest_window_below(double level, double t_lo, double t_hi) const {
    double best = 0.0;
    std::optional<double> start;
    double last = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const bool inside = times[i] >= t_lo && times[i] <= t_hi;
        if (inside && c[i] < level) {
            if (!start) {
                start = times[i];
            }
            last = times[i];
            best = std::max(best, last - *start);
        } else {
            start.reset();
        }
    }
    return best;
}

bool SignalTrace::settled() const {
    if (times.empty() || times.back() < 8.0) {
        return true;
    }
    return std::abs(c.back() - 1.0) < 1e-3;
}

SignalTrace output_signal(std::complex<double> chi1, std::complex<double> chi2, double kappa,
                          const HomodyneSettings& settings) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw InvalidParameter("kappa must be positive");
    }
    settings.validate();
    theta_squared(chi1, chi2);

    const QuadratureMoments m = quadrature_moments(chi1, chi2, settings.theta1, settings.theta2);
    // The detection-model path uses the state from the integrator, not the
    // closed-form moments.
    const GaussianState pair = drive_pulse(chi1, chi2, 0.0).final_state.reduced({"cav1", "cav2"});

    SignalTrace trace;
    trace.r = std::abs(chi1) > 0.0 ? std::abs(chi2) / std::abs(chi1)
                                   : std::numeric_limits<double>::infinity();
    trace.beta = std::arg(chi1) + std::arg(chi2);
    trace.kappa_dt = settings.kappa_dt;
    trace.theta_sum = settings.theta1 + settings.theta2;
    const std::size_t n = settings.t_grid.size();
    trace.times = settings.t_grid;
    trace.c.reserve(n);
    trace.c_model.reserve(n);
    trace.weight.reserve(n);
    for (double kt : settings.t_grid) {
        trace.c.push_back(signal_closed_form(m, settings.kappa_dt, kt));
        trace.c_model.push_back(
            signal_beam_splitter(pair, settings.theta1, settings.theta2, settings.kappa_dt, kt));
        trace.weight.push_back(signal_weight(m, settings.kappa_dt, kt));
    }
    trace.q1_sq.assign(n, m.q1_sq);
    trace.q1q2.assign(n, m.q1q2);
    return trace;
}

SignalTrace output_signal(const Couplings& couplings, double kappa, const HomodyneSettings& settings) {
    return output_signal(couplings.chi1, couplings.chi2, kappa, settings);
}

void write_csv(std::ostream& out, const SignalTrace& trace) {
    out << "# r=" << format_double(trace.r) << ", kappa_dt=" << format_double(trace.kappa_dt)
        << ", theta_sum=" << format_double(trace.theta_sum) << '\n';
    out << "kappa_t,C,R,q1_sq,q1q2\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << format_double(trace.times[i]) << ',' << format_double(trace.c[i]) << ','
            << format_double(trace.weight[i]) << ',' << format_double(trace.q1_sq[i]) << ','
            << format_double(trace.q1q2[i]) << '\n';
    }
}

std::vector<SignalTrace> fig3_sweep(const std::vector<double>& r_values, double kappa_dt,
                                    const std::vector<double>& t_grid) {
    for (double r : r_values) {
        if (!(r > 1.0) || !std::isfinite(r)) {
            throw ProtocolUndefined("every r must be > 1 (got " + format_double(r) + ")");
        }
    }
    HomodyneSettings settings;
    settings.kappa_dt = kappa_dt;
    settings.t_grid = t_grid;
    settings.validate();

    std::vector<std::future<SignalTrace>> jobs;
    jobs.reserve(r_values.size());
    for (double r : r_values) {
        jobs.push_back(std::async(std::launch::async, [r, &settings] {
            return output_signal({1.0, 0.0}, {r, 0.0}, 1.0, settings);
        }));
    }
    std::vector<SignalTrace> traces;
    traces.reserve(jobs.size());
    for (auto& job : jobs) {
        traces.push_back(job.get());
    }
    return traces;
}

SequentialResult run_sequential(const SequentialSetup& s) {
    if (!(s.t1 > 0.0) || !std::isfinite(s.t1)) {
        throw InvalidParameter("first pulse length t1 must be positive");
    }
    if (!(s.delay_T12 >= 0.0)) {
        throw InvalidParameter("pulse delay T12 must be >= 0");
    }
    if (!(s.swap_area >= 0.0) || !std::isfinite(s.swap_area)) {
        throw InvalidParameter("swap pulse area must be finite and >= 0");
    }
    if (std::abs(s.chi2) == 0.0) {
        throw InvalidParameter("swap stage needs chi2 != 0");
    }
    if (!(s.kappa > 0.0) && !std::isinf(s.delay_T12)) {
        throw InvalidParameter("finite delay needs kappa > 0");
    }

    GaussianState state = vacuum({"cav"}).tensor(thermal(s.nbar_motion, "motion"));
    state = state.tensor(vacuum({"pulse1"}));

    // Stage A: da/dt = chi1 b^dagger, db/dt = chi1 a^dagger.
    {
        ComplexMatrix m = ComplexMatrix::Zero(3, 3);
        ComplexMatrix n = ComplexMatrix::Zero(3, 3);
        n(0, 1) = s.chi1;
        n(1, 0) = s.chi1;
        state = stage(state, m, n, s.t1);
    }
    SequentialResult result{.final_state = state};
    result.en_motion_cavity_stage_a = log_negativity(state.reduced({"cav", "motion"}), {"cav"});

    // Stage B: the intracavity field leaves into the pulse1 register.
    const double efficiency =
        std::isinf(s.delay_T12) ? 1.0 : -std::expm1(-2.0 * s.kappa * s.delay_T12);
    {
        const double t = std::sqrt(efficiency);
        const double rr = std::sqrt(1.0 - efficiency);
        ComplexMatrix u = ComplexMatrix::Zero(3, 3);
        u(0, 0) = rr;
        u(0, 2) = -t;
        u(1, 1) = 1.0;
        u(2, 0) = t;
        u(2, 2) = rr;
        state = state.transformed(ladder_to_quadrature(u, ComplexMatrix::Zero(3, 3)));
    }

    // Stage C: da/dt = chi2 b, db/dt = -conj(chi2) a.
    const double t2 = s.swap_area / std::abs(s.chi2);
    {
        ComplexMatrix m = ComplexMatrix::Zero(3, 3);
        ComplexMatrix n = ComplexMatrix::Zero(3, 3);
        m(0, 1) = s.chi2;
        m(1, 0) = -std::conj(s.chi2);
        state = stage(state, m, n, t2);
    }

    result.en_pulse1_pulse2 = log_negativity(state.reduced({"pulse1", "cav"}), {"pulse1"});
    result.en_pulse1_motion = log_negativity(state.reduced({"pulse1", "motion"}), {"pulse1"});
    result.motion_decorrelation = decorrelation_norm(state, {"motion"}, {"cav", "pulse1"});
    result.swap_area = s.swap_area;
    result.swap_time = t2;
    result.extraction_efficiency = efficiency;
    result.final_state = std::move(state);
    return result;
}

SequentialResult run_sequential(const PhysicalParams& params, double t1, double delay_T12,
                                double swap_area) {
    const Couplings c = coupling_constants(params);
    SequentialSetup setup;
    setup.chi1 = c.chi1;
    setup.chi2 = c.chi2;
    setup.kappa = params.kappa;
    setup.nbar_motion = params.nbar_motion;
    setup.t1 = t1;
    setup.delay_T12 = delay_T12;
    setup.swap_area = swap_area;
    return run_sequential(setup);
}

}  // namespace entpulse
