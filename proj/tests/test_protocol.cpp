#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "entpulse/errors.hpp"
#include "entpulse/protocol.hpp"
#include "entpulse/units.hpp"
#include "support/reference.hpp"

using namespace entpulse;
using cplx = std::complex<double>;

namespace {

PhysicalParams indium(double delta_hz = -60e6) {
    PhysicalParams p;
    p.nu = units::angular(3e6);
    p.gamma = units::angular(360e3);
    p.delta = units::angular(delta_hz);
    p.omega_rabi = units::angular(18e6);
    p.kappa = units::angular(1e3);
    p.g1 = units::angular(500e3);
    p.g2 = units::angular(500e3);
    p.mass = 115 * units::atomic_mass;
    p.wavenumber = units::two_pi / 230.6e-9;
    return p;
}

HomodyneSettings settings(double theta1 = 0.0, double theta2 = 0.0) {
    HomodyneSettings s;
    s.theta1 = theta1;
    s.theta2 = theta2;
    s.kappa_dt = 0.1;
    s.t_grid = default_fig3_grid();
    return s;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Continuous crossing of C = level by bisection on the closed form.
double crossing(double r, double level) {
    const QuadratureMoments m = quadrature_moments({1, 0}, {r, 0}, 0, 0);
    double lo = 0.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (signal_closed_form(m, 0.1, mid) > level ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("simultaneous pulses on the indium set") {
    SimultaneousOptions opts;
    opts.much_greater_ratio = 5.0;
    const SimultaneousResult res = run_simultaneous(indium(), opts);
    CHECK(res.regime.pass);
    CHECK(res.diagnostics.t_pi == doctest::Approx(71.2953117463288e-6).epsilon(1e-10));
    CHECK(res.diagnostics.mean_photons_cav1 == doctest::Approx(99.5024295081).epsilon(1e-8));
    CHECK(res.diagnostics.motion_decorrelation < 1e-9);
    const GaussianState expected = tmss(res.couplings.r, res.couplings.beta);
    CHECK(max_abs(res.final_state.reduced({"cav1", "cav2"}).cov() - expected.cov()) <
          1e-9 * max_abs(expected.cov()));

    // Default factor ten rejects this set unless forced.
    CHECK_THROWS_AS(run_simultaneous(indium()), RegimeViolation);
    SimultaneousOptions forced;
    forced.force = true;
    const SimultaneousResult f = run_simultaneous(indium(), forced);
    CHECK_FALSE(f.regime.pass);
    CHECK(f.diagnostics.mean_photons_cav1 == doctest::Approx(res.diagnostics.mean_photons_cav1));

    CHECK_THROWS_AS(run_simultaneous(indium(60e6), forced), ProtocolUndefined);
}

TEST_CASE("r = 1.1 operating point") {
    SimultaneousOptions opts;
    opts.much_greater_ratio = 5.0;
    const SimultaneousResult res = run_simultaneous(indium(-63e6), opts);
    CHECK(res.couplings.r == doctest::Approx(1.1).epsilon(1e-5));
    CHECK(std::abs(res.diagnostics.mean_photons_cav1 - 109.75) < 0.01);
    CHECK(std::abs(res.diagnostics.mean_photons_cav2 - 109.75) < 0.01);
}

TEST_CASE("initial motional state does not matter") {
    PhysicalParams hot = indium(-63e6);
    hot.nbar_motion = 5.0;
    SimultaneousOptions opts;
    opts.much_greater_ratio = 5.0;
    const SimultaneousResult a = run_simultaneous(indium(-63e6), opts);
    const SimultaneousResult b = run_simultaneous(hot, opts);
    const Matrix ca = a.final_state.reduced({"cav1", "cav2"}).cov();
    const Matrix cb = b.final_state.reduced({"cav1", "cav2"}).cov();
    CHECK(max_abs(ca - cb) < 1e-9 * max_abs(ca));
    CHECK(b.diagnostics.motion_decorrelation < 1e-9 * max_abs(ca));
    CHECK(b.diagnostics.mean_photons_motion == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("no H1 leaves the cavity empty") {
    const PulseRun run = drive_pulse({0, 0}, {1.3, 0.2}, 2.0);
    CHECK(run.diagnostics.mean_photons_cav1 < 1e-15);
    CHECK(run.diagnostics.mean_photons_cav2 < 1e-15);
    CHECK(run.diagnostics.log_negativity < 1e-15);
    CHECK(run.diagnostics.mean_photons_motion == doctest::Approx(2.0));
    const SignalTrace trace = output_signal({0, 0}, {1.3, 0.2}, 1.0, settings());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(trace.c[i] == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("lossy drive is a perturbation") {
    const PulseRun ideal = drive_pulse({1, 0}, {2, 0}, 0.0);
    const PulseRun lossy = drive_pulse({1, 0}, {2, 0}, 0.0, 0.02, true);
    CHECK(lossy.diagnostics.log_negativity < ideal.diagnostics.log_negativity);
    CHECK(lossy.diagnostics.log_negativity > 0.9 * ideal.diagnostics.log_negativity);
    CHECK(is_physical(lossy.final_state));
    CHECK_THROWS_AS(drive_pulse({1, 0}, {1, 0}, 0.0), ProtocolUndefined);
}

TEST_CASE("quadrature moments") {
    SUBCASE("r = 1.1") {
        const QuadratureMoments m = quadrature_moments({1, 0}, {1.1, 0}, 0, 0);
        CHECK(m.q1_sq == doctest::Approx((2.21 * 2.21 + 4.84) / 0.0441).epsilon(1e-13));
        CHECK(m.q1q2 == doctest::Approx(4 * 1.1 * 2.21 / 0.0441).epsilon(1e-13));
        CHECK(m.q1_sq == doctest::Approx(220.501133786848).epsilon(1e-12));
        CHECK(m.q1q2 == doctest::Approx(220.498866213152).epsilon(1e-12));
    }
    SUBCASE("no H1") {
        const QuadratureMoments m = quadrature_moments({0, 0}, {0.4, 1.0}, 0.3, 0.1);
        CHECK(m.q1_sq == doctest::Approx(1.0));
        CHECK(m.q1q2 == 0.0);
    }
    SUBCASE("quarter-turn phase sum with real couplings") {
        const QuadratureMoments m = quadrature_moments({1, 0}, {2, 0}, 0.3, std::numbers::pi / 2 - 0.3);
        CHECK(std::abs(m.q1q2) < 1e-14 * m.q1_sq);
    }
    CHECK_THROWS_AS(quadrature_moments({1, 0}, {0.5, 0}, 0, 0), ProtocolUndefined);
}

TEST_CASE("closed-form moments match the evolved state") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> ph(-std::numbers::pi, std::numbers::pi);
    for (int i = 0; i < 20; ++i) {
        const auto d = ref::draw(rng, 1.0, 3.0);
        const double t1 = ph(rng), t2 = ph(rng);
        const QuadratureMoments a = quadrature_moments(d.chi1, d.chi2, t1, t2);
        const QuadratureMoments b = quadrature_moments(drive_pulse(d.chi1, d.chi2, 0.0).final_state, t1, t2);
        const double scale = std::max(1.0, a.q1_sq);
        CHECK(std::abs(a.q1_sq - b.q1_sq) < 1e-9 * scale);
        CHECK(std::abs(a.q2_sq - b.q2_sq) < 1e-9 * scale);
        CHECK(std::abs(a.q1q2 - b.q1q2) < 1e-9 * scale);
    }
}

TEST_CASE("closed form equals the attenuate-and-mix model") {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> ph(-std::numbers::pi, std::numbers::pi);
    for (int i = 0; i < 10; ++i) {
        const auto d = ref::draw(rng, 1.02, 3.0);
        const HomodyneSettings s = settings(ph(rng), ph(rng));
        const SignalTrace trace = output_signal(d.chi1, d.chi2, 1.0, s);
        for (std::size_t k = 0; k < trace.size(); ++k) {
            CHECK(std::abs(trace.c[k] - trace.c_model[k]) < 1e-9);
            const double oracle = ref::mixed_signal(trace.q1_sq[k], trace.q1_sq[k], trace.q1q2[k],
                                                    s.kappa_dt, trace.times[k]);
            CHECK(std::abs(trace.c[k] - oracle) < 1e-12);
        }
    }
}

TEST_CASE("frozen signal values") {
    const std::vector<SignalTrace> traces = fig3_sweep(default_fig3_r_values(), 0.1, default_fig3_grid());
    REQUIRE(traces.size() == 5);
    struct Frozen {
        double r, c0, grid_cross, cross, c3, c8;
    };
    const Frozen frozen[] = {
        {1.8, 0.455106237148732, 0.10, 0.0913733, 0.996993, 0.99999986},
        {1.5, 0.287671232876712, 0.46, 0.4557396, 0.993851, 0.9999997},
        {1.3, 0.145854450862816, 0.90, 0.885155, 0.985644, 0.9999993},
        {1.1, 0.0221828932284858, 1.90, 1.8932222, 0.901459, 0.999995},
        {1.05, 0.00591436206365203, 2.58, 2.562279, 0.705876720598131, 0.999981},
    };
    for (std::size_t i = 0; i < 5; ++i) {
        const SignalTrace& t = traces[i];
        const Frozen& f = frozen[i];
        CAPTURE(f.r);
        CHECK(t.r == f.r);
        CHECK(t.c[0] == doctest::Approx(f.c0).epsilon(1e-12));
        CHECK(t.argmin() == 0);
        REQUIRE(t.first_crossing(0.5));
        CHECK(*t.first_crossing(0.5) == doctest::Approx(f.grid_cross).epsilon(1e-12));
        CHECK(crossing(f.r, 0.5) == doctest::Approx(f.cross).epsilon(1e-6));
        CHECK(t.c[150] == doctest::Approx(f.c3).epsilon(1e-6));
        CHECK(t.times[150] == doctest::Approx(3.0));
        CHECK(t.c.back() == doctest::Approx(f.c8).epsilon(1e-7));
        CHECK(t.settled());
        for (double c : t.c) {
            CHECK(c > 0.0);
            CHECK(c <= 1.0);
        }
    }
    CHECK(traces[4].c[150] == doctest::Approx(0.705876720598131).epsilon(1e-12));
    // Squeezing below a tenth of shot noise for r = 1.1 up to kappa t = 0.78.
    CHECK(traces[3].longest_window_below(0.1, 0.0, 1.5) == doctest::Approx(0.78));
}

TEST_CASE("crossing order and depth follow r") {
    const std::vector<SignalTrace> traces = fig3_sweep(default_fig3_r_values(), 0.1, default_fig3_grid());
    for (std::size_t i = 1; i < traces.size(); ++i) {
        CHECK(*traces[i].first_crossing(0.5) > *traces[i - 1].first_crossing(0.5));
        CHECK(traces[i].c[traces[i].argmin()] < traces[i - 1].c[traces[i - 1].argmin()]);
    }
}

TEST_CASE("signal approaches shot noise") {
    HomodyneSettings s = settings();
    s.t_grid = {10.0};
    for (double r : {1.05, 1.1, 2.0}) {
        CHECK(std::abs(output_signal({1, 0}, {r, 0}, 1.0, s).c[0] - 1.0) < 1e-3);
    }
}

TEST_CASE("both homodyne settings give the same trace for real couplings") {
    for (double r : default_fig3_r_values()) {
        const SignalTrace a = output_signal({1, 0}, {r, 0}, 1.0, settings(0, 0));
        const SignalTrace b =
            output_signal({1, 0}, {r, 0}, 1.0, settings(std::numbers::pi / 2, -std::numbers::pi / 2));
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(std::abs(a.c[k] - b.c[k]) <= 1e-12);
            CHECK(std::abs(a.c_model[k] - b.c_model[k]) <= 1e-12);
        }
    }
}

TEST_CASE("sub-shot-noise signal iff the pair is entangled") {
    for (double r : {1.01, 1.05, 1.1, 1.3, 1.8, 3.0, 10.0, 100.0}) {
        const SignalTrace t = output_signal({1, 0}, {r, 0}, 1.0, settings());
        const bool squeezed = t.c[t.argmin()] < 1.0;
        const bool entangled = drive_pulse({1, 0}, {r, 0}, 0.0).diagnostics.log_negativity > 0.0;
        CHECK(squeezed == entangled);
    }
}

TEST_CASE("signal argument checks") {
    CHECK_THROWS_AS(output_signal({1, 0}, {2, 0}, 0.0, settings()), InvalidParameter);
    CHECK_THROWS_AS(output_signal({1, 0}, {0.5, 0}, 1.0, settings()), ProtocolUndefined);
    HomodyneSettings bad = settings();
    bad.kappa_dt = 1.5;
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
    bad = settings();
    bad.t_grid = {0.0, -1.0};
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
    bad.t_grid.clear();
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
    CHECK_THROWS_AS(fig3_sweep({1.5, 0.9}, 0.1, default_fig3_grid()), ProtocolUndefined);
    CHECK_THROWS_AS(uniform_grid(1.0, 0.0), InvalidParameter);
    CHECK(uniform_grid(8.0, 0.02).size() == 401);
    CHECK(uniform_grid(0.3, 0.1).back() == doctest::Approx(0.3));
}

TEST_CASE("CSV layout") {
    HomodyneSettings s = settings();
    s.t_grid = {0.0, 0.5};
    const SignalTrace t = output_signal({1, 0}, {1.5, 0}, 1.0, s);
    std::ostringstream out;
    write_csv(out, t);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "# r=1.5, kappa_dt=0.1, theta_sum=0");
    std::getline(in, line);
    CHECK(line == "kappa_t,C,R,q1_sq,q1q2");
    std::getline(in, line);
    CHECK(line.starts_with("0,0.2876712328767"));
    std::getline(in, line);
    CHECK(line.starts_with("0.5,"));
    CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("sequential pulses: ideal memory") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(0.2, 1.5);
    for (int i = 0; i < 10; ++i) {
        const auto d = ref::draw(rng, 0.3, 3.0);
        SequentialSetup s;
        s.chi1 = d.chi1;
        s.chi2 = d.chi2;
        s.kappa = 1.0;
        s.nbar_motion = (i % 3 == 0) ? 2.0 : 0.0;
        s.t1 = u(rng) / std::abs(d.chi1);
        s.delay_T12 = std::numeric_limits<double>::infinity();
        const SequentialResult res = run_sequential(s);
        CHECK(res.extraction_efficiency == 1.0);
        CHECK(res.en_motion_cavity_stage_a > 0.0);
        CHECK(std::abs(res.en_pulse1_pulse2 - res.en_motion_cavity_stage_a) < 1e-9);
        CHECK(res.motion_decorrelation < 1e-9);
        CHECK(res.swap_time == doctest::Approx(std::numbers::pi / 2 / std::abs(d.chi2)));
    }
}

TEST_CASE("sequential pulses: stage A squeezing") {
    SequentialSetup s;
    s.chi1 = {2.0, 0.0};
    s.chi2 = {1.0, 0.0};
    s.kappa = 1.0;
    s.t1 = 0.35;
    s.delay_T12 = std::numeric_limits<double>::infinity();
    const SequentialResult res = run_sequential(s);
    // Pure two-mode squeezing with s = |chi1| t1 from vacuum: E_N = 2 s.
    CHECK(res.en_motion_cavity_stage_a == doctest::Approx(2 * 0.7).epsilon(1e-12));
}

TEST_CASE("sequential pulses: double swap area") {
    SequentialSetup s;
    s.chi1 = {1.0, 0.0};
    s.chi2 = {1.7, 0.4};
    s.kappa = 1.0;
    s.t1 = 0.8;
    s.delay_T12 = std::numeric_limits<double>::infinity();
    s.swap_area = std::numbers::pi;
    const SequentialResult res = run_sequential(s);
    CHECK(res.en_pulse1_pulse2 < 1e-12);
    CHECK(std::abs(res.en_pulse1_motion - res.en_motion_cavity_stage_a) < 1e-9);
}

TEST_CASE("sequential pulses: no H1") {
    SequentialSetup s;
    s.chi1 = {0.0, 0.0};
    s.chi2 = {1.0, 0.0};
    s.kappa = 1.0;
    s.t1 = 1.0;
    s.delay_T12 = 5.0;
    const SequentialResult res = run_sequential(s);
    CHECK(res.en_motion_cavity_stage_a == 0.0);
    CHECK(res.en_pulse1_pulse2 == 0.0);
    CHECK(res.en_pulse1_motion == 0.0);
}

TEST_CASE("sequential pulses: finite delay") {
    SequentialSetup s;
    s.chi1 = {1.0, 0.0};
    s.chi2 = {1.3, 0.0};
    s.kappa = 1.0;
    s.t1 = 1.0;
    double previous = -1.0;
    for (double kt : {1.0, 3.0, 5.0, 10.0}) {
        s.delay_T12 = kt;
        const SequentialResult res = run_sequential(s);
        CHECK(res.extraction_efficiency == doctest::Approx(1 - std::exp(-2 * kt)));
        CHECK(res.en_pulse1_pulse2 >= previous);
        previous = res.en_pulse1_pulse2;
    }
    // At kappa T12 = 10 the field left behind has amplitude e^{-10}; the
    // residual motion correlation scales with it.
    s.delay_T12 = 10.0;
    const double residual = run_sequential(s).motion_decorrelation;
    s.delay_T12 = 11.0;
    const double later = run_sequential(s).motion_decorrelation;
    CHECK(residual > 0.0);
    CHECK(later / residual == doctest::Approx(std::exp(-1.0)).epsilon(1e-4));
}

TEST_CASE("sequential argument checks") {
    SequentialSetup s;
    s.chi1 = {1.0, 0.0};
    s.chi2 = {1.3, 0.0};
    s.kappa = 1.0;
    s.t1 = 0.0;
    s.delay_T12 = 5.0;
    CHECK_THROWS_AS(run_sequential(s), InvalidParameter);
    s.t1 = 1.0;
    s.swap_area = -1.0;
    CHECK_THROWS_AS(run_sequential(s), InvalidParameter);
    s.swap_area = 1.0;
    s.chi2 = {0.0, 0.0};
    CHECK_THROWS_AS(run_sequential(s), InvalidParameter);
}

TEST_CASE("sequential pulses from physical parameters") {
    const PhysicalParams p = indium();
    const Couplings c = coupling_constants(p);
    const SequentialResult res = run_sequential(p, 1.0 / std::abs(c.chi1), 10.0 / p.kappa);
    CHECK(res.en_motion_cavity_stage_a == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(res.en_pulse1_pulse2 - 2.0) < 1e-7);
    CHECK(res.extraction_efficiency == doctest::Approx(1 - std::exp(-20.0)));
}
