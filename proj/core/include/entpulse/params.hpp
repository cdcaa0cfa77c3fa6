#pragma once

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "entpulse/units.hpp"

namespace entpulse {

using complex = std::complex<double>;

// Every experimentally settable quantity, in SI units with angular
// frequencies (rad/s). Absolute optical frequencies are never stored; only
// the detuning and the +/- nu sideband offsets enter the couplings.
struct PhysicalParams {
    double nu = 0.0;          // trap frequency
    double gamma = 0.0;       // atomic linewidth
    double delta = 0.0;       // laser-atom detuning, signed
    double omega_rabi = 0.0;  // laser Rabi frequency
    double kappa = 0.0;       // cavity field (amplitude) decay rate
    complex g1{0.0, 0.0};     // vacuum Rabi frequencies of the two cavity modes
    complex g2{0.0, 0.0};
    double alpha1 = 0.0;  // cavity field-gradient scalars
    double alpha2 = 0.0;
    double theta_L = 0.0;              // trap axis vs laser wave vector
    double theta_c = units::pi / 2.0;  // trap axis vs cavity wave vector
    double mass = 0.0;                 // kg
    double wavenumber = 0.0;           // 1/m
    double nbar_motion = 0.0;
    std::optional<double> pulse_length_T;  // s; T_pi when absent

    // Throws InvalidParameter when an invariant is broken, including the
    // sideband pole guard |delta -/+ nu| < gamma.
    void validate() const;
};

// sqrt(hbar k^2 / (2 M nu)).
double lamb_dicke(double mass, double wavenumber, double nu);

struct ChiPair {
    complex chi1;
    complex chi2;
};

// Quantities that follow from (chi1, chi2) alone. Theta, T_pi and <n> exist
// only when |chi2| > |chi1|.
struct DerivedRates {
    std::optional<double> theta_rate;
    double r = 0.0;
    double beta = 0.0;
    std::optional<double> t_pi;
    std::optional<double> n_mean;
};

DerivedRates derived_rates(complex chi1, complex chi2);

struct Couplings {
    complex chi1;
    complex chi2;
    double eta = 0.0;
    std::optional<double> theta_rate;
    double r = 0.0;
    double beta = 0.0;
    std::optional<double> t_pi;
    std::optional<double> n_mean;

    bool periodic() const noexcept { return theta_rate.has_value(); }
    ChiPair pair() const noexcept { return {chi1, chi2}; }
};

// Raman coupling constants from the laser/cavity geometry. Only the pole
// guard is enforced, so omega_rabi = 0 is accepted here.
ChiPair chi_from_params(const PhysicalParams& params);

// Validates params, then computes chi1, chi2 and the derived rates.
Couplings coupling_constants(const PhysicalParams& params);

enum class QuantityKind { angular_frequency, dimensionless };

// One inequality "left >> right", evaluated as left >= required * right.
struct RegimeCheck {
    std::string id;
    std::string label;
    std::optional<double> left;
    std::optional<double> right;
    std::optional<double> margin;  // left / right
    double required = 0.0;
    bool pass = false;
    bool soft = false;  // reported, but does not enter the verdict
    QuantityKind kind = QuantityKind::dimensionless;
};

struct RegimeReport {
    std::vector<RegimeCheck> checks;
    bool pass = false;
    double much_greater_ratio = 10.0;
    double soft_ratio = 2.0;

    const RegimeCheck* find(std::string_view id) const;
};

inline constexpr double default_much_greater_ratio = 10.0;
inline constexpr double default_soft_ratio = 2.0;

RegimeReport validate_regime(const PhysicalParams& params, const Couplings& couplings,
                             double much_greater_ratio = default_much_greater_ratio,
                             double soft_ratio = default_soft_ratio);

// Aligned plain-text table; angular frequencies are shown divided by 2 pi.
std::string format_report(const RegimeReport& report);

}  // namespace entpulse
