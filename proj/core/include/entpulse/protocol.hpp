#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <vector>

#include "entpulse/gaussian.hpp"
#include "entpulse/params.hpp"

namespace entpulse {

// ---------------------------------------------------------------------------
// Simultaneous pulses: drive H1 + H2 for T_pi from vacuum (x) vacuum (x)
// thermal motion, leaving a two-mode squeezed pair in the cavity.

struct PulseDiagnostics {
    double t_pi = 0.0;
    double mean_photons_cav1 = 0.0;
    double mean_photons_cav2 = 0.0;
    double mean_photons_motion = 0.0;
    double log_negativity = 0.0;        // cav1 | cav2
    double epr_x = 0.0;                 // Delta(X1 - X2)^2
    double epr_p = 0.0;                 // Delta(P1 + P2)^2
    double epr_best = 0.0;              // at theta1 = theta2 = -beta/2
    double motion_decorrelation = 0.0;  // || cov(motion, {cav1, cav2}) ||_F
};

struct PulseRun {
    GaussianState final_state;  // modes cav1, cav2, motion
    PulseDiagnostics diagnostics;
};

// Closed dynamics for T_pi unless include_decay, in which case both cavity
// modes decay at kappa during the drive (sensitivity study only; the
// normative run has no decay). Throws ProtocolUndefined for |chi2| <= |chi1|.
PulseRun drive_pulse(std::complex<double> chi1, std::complex<double> chi2, double nbar_motion,
                     double kappa = 0.0, bool include_decay = false);

struct SimultaneousOptions {
    bool force = false;  // run even when the regime check fails
    bool include_decay = false;
    double much_greater_ratio = default_much_greater_ratio;
    double soft_ratio = default_soft_ratio;
};

struct SimultaneousResult {
    GaussianState final_state;
    Couplings couplings;
    PulseDiagnostics diagnostics;
    RegimeReport regime;
};

// Throws RegimeViolation when a hard constraint fails and !options.force,
// ProtocolUndefined when r <= 1.
SimultaneousResult run_simultaneous(const PhysicalParams& params,
                                    const SimultaneousOptions& options = {});

// ---------------------------------------------------------------------------
// Homodyne detection of the emitted pair.

struct HomodyneSettings {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double kappa_dt = 0.1;       // time bin in units of the cavity lifetime
    std::vector<double> t_grid;  // kappa * t, each >= 0

    // 0 < kappa_dt <= 1, non-empty grid of finite non-negative times.
    void validate() const;
};

// 0, step, 2 step, ... up to and including t_max (within rounding).
std::vector<double> uniform_grid(double t_max, double step);

struct QuadratureMoments {
    double q1_sq = 0.0;
    double q2_sq = 0.0;
    double q1q2 = 0.0;
};

// Closed-form moments of the T_pi state:
//   <q1^2> = <q2^2> = [(|chi1|^2 + |chi2|^2)^2 + 4 |chi1 chi2|^2] / Theta^4
//   <q1 q2> = Re{4 chi1 chi2 (|chi1|^2 + |chi2|^2) e^{i(theta1 + theta2)}} / Theta^4
QuadratureMoments quadrature_moments(std::complex<double> chi1, std::complex<double> chi2,
                                     double theta1, double theta2);

// The same moments read off a Gaussian state holding modes cav1 and cav2.
QuadratureMoments quadrature_moments(const GaussianState& state, double theta1, double theta2);

// R(t) = kappa dt e^{-2 kappa t} (<q1^2> + <q2^2>).
double signal_weight(const QuadratureMoments& m, double kappa_dt, double kappa_t);

// C(t) = 1 - [R/(1 + R)] 2<q1 q2>/(<q1^2> + <q2^2>).
double signal_closed_form(const QuadratureMoments& m, double kappa_dt, double kappa_t);

// Explicit detection model: each cavity mode, attenuated by e^{-kappa t},
// contributes a bin mode sqrt(2 kappa dt) e^{-kappa t} a_j on top of one
// vacuum free-field mode. Both are combined on a beam splitter of
// transmissivity g^2/(1 + g^2), g^2 = 2 kappa dt e^{-2 kappa t}, and
//   C = Var(Q1 - Q2) / (Var Q1 + Var Q2)
// for the output quadratures Q_j(theta_j), i.e. relative to the same fields
// with their cross-correlation removed.
double signal_beam_splitter(const GaussianState& cavity_pair, double theta1, double theta2,
                            double kappa_dt, double kappa_t);

struct SignalTrace {
    double r = 0.0;
    double beta = 0.0;
    double kappa_dt = 0.0;
    double theta_sum = 0.0;
    std::vector<double> times;  // kappa t
    std::vector<double> c;      // closed form
    std::vector<double> c_model;
    std::vector<double> weight;  // R(t)
    std::vector<double> q1_sq;
    std::vector<double> q1q2;

    std::size_t size() const noexcept { return times.size(); }
    std::size_t argmin() const;
    // First grid time at which C exceeds `level`, if any.
    std::optional<double> first_crossing(double level) const;
    // Longest contiguous run (in kappa t) with C < level inside [t_lo, t_hi].
    double longest_window_below(double level, double t_lo, double t_hi) const;
    // When the grid reaches kappa t >= 8, the last point must have |C - 1| < 1e-3.
    bool settled() const;
};

// Throws ProtocolUndefined for |chi2| <= |chi1|, InvalidParameter for
// kappa <= 0 or invalid settings.
SignalTrace output_signal(std::complex<double> chi1, std::complex<double> chi2, double kappa,
                          const HomodyneSettings& settings);
SignalTrace output_signal(const Couplings& couplings, double kappa,
                          const HomodyneSettings& settings);

// CSV with a "# r=..., kappa_dt=..., theta_sum=..." header line followed by
// kappa_t,C,R,q1_sq,q1q2 rows in shortest round-trip formatting.
void write_csv(std::ostream& out, const SignalTrace& trace);

inline std::vector<double> default_fig3_r_values() { return {1.8, 1.5, 1.3, 1.1, 1.05}; }
inline std::vector<double> default_fig3_grid() { return uniform_grid(8.0, 0.02); }

// One trace per r, computed with chi1 = 1, chi2 = r and theta1 = theta2 = 0.
// Per-r work runs concurrently; the result order follows r_values.
std::vector<SignalTrace> fig3_sweep(const std::vector<double>& r_values, double kappa_dt,
                                    const std::vector<double>& t_grid);

// ---------------------------------------------------------------------------
// Sequential pulses with the motion as memory. Modes: cav, motion, pulse1.
//   A: H1 on (cav, motion) for t1
//   B: pulse 1 leaves the cavity; beam splitter of transmittance
//      1 - e^{-2 kappa T12} into the pulse1 register, vacuum refill
//   C: H2 on (cav, motion) for t2 = swap_area / |chi2|

struct SequentialSetup {
    std::complex<double> chi1;
    std::complex<double> chi2;
    double kappa = 0.0;
    double nbar_motion = 0.0;
    double t1 = 0.0;
    double delay_T12 = 0.0;  // +infinity models ideal extraction
    double swap_area = units::pi / 2.0;
};

struct SequentialResult {
    double en_motion_cavity_stage_a = 0.0;
    double en_pulse1_pulse2 = 0.0;  // pulse1 | cavity after the swap
    double en_pulse1_motion = 0.0;  // pulse1 | motion after the swap
    double motion_decorrelation = 0.0;
    double swap_area = 0.0;
    double swap_time = 0.0;
    double extraction_efficiency = 0.0;
    GaussianState final_state;
};

SequentialResult run_sequential(const SequentialSetup& setup);
SequentialResult run_sequential(const PhysicalParams& params, double t1, double delay_T12,
                                double swap_area = units::pi / 2.0);

}  // namespace entpulse
