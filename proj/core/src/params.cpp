#include "entpulse/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <iomanip>
#include <sstream>

#include "entpulse/errors.hpp"

namespace entpulse {

namespace {

void require_positive(double value, const char* name) {
    if (!std::isfinite(value) || !(value > 0.0)) {
        throw InvalidParameter(std::string(name) + " must be positive and finite");
    }
}

void require_finite(double value, const char* name) {
    if (!std::isfinite(value)) {
        throw InvalidParameter(std::string(name) + " must be finite");
    }
}

// Lorentzian sideband factor 1 / (detuning + i gamma/2).
complex sideband(double detuning, double gamma, const char* what) {
    const complex denom{detuning, gamma / 2.0};
    if (denom == complex{0.0, 0.0}) {
        throw InvalidParameter(std::string("division by zero in coupling constant: ") + what +
                               " and gamma are both zero");
    }
    return 1.0 / denom;
}

RegimeCheck much_greater(std::string id, std::string label, std::optional<double> left,
                         std::optional<double> right, double required, QuantityKind kind,
                         bool soft = false) {
    RegimeCheck check;
    check.id = std::move(id);
    check.label = std::move(label);
    check.left = left;
    check.right = right;
    check.required = required;
    check.soft = soft;
    check.kind = kind;
    if (left && right) {
        check.margin = *right > 0.0 ? *left / *right : std::numeric_limits<double>::infinity();
        check.pass = *left >= required * *right;
    }
    return check;
}

}  // namespace

void PhysicalParams::validate() const {
    require_positive(nu, "nu");
    require_positive(gamma, "gamma");
    require_positive(kappa, "kappa");
    require_positive(mass, "mass");
    require_positive(wavenumber, "wavenumber");
    require_positive(omega_rabi, "omega_rabi");
    require_finite(delta, "delta");
    require_finite(alpha1, "alpha1");
    require_finite(alpha2, "alpha2");
    require_finite(theta_L, "theta_L");
    require_finite(theta_c, "theta_c");
    if (!std::isfinite(std::abs(g1)) || !std::isfinite(std::abs(g2))) {
        throw InvalidParameter("g1 and g2 must be finite");
    }
    if (!std::isfinite(nbar_motion) || nbar_motion < 0.0) {
        throw InvalidParameter("nbar_motion must be >= 0");
    }
    if (pulse_length_T) {
        require_positive(*pulse_length_T, "pulse_length_T");
    }
    if (std::abs(delta - nu) < gamma || std::abs(delta + nu) < gamma) {
        throw InvalidParameter("detuning within one linewidth of a motional sideband pole "
                               "(|delta -/+ nu| < gamma)");
    }
}

double lamb_dicke(double mass, double wavenumber, double nu) {
    require_positive(mass, "mass");
    require_positive(wavenumber, "wavenumber");
    require_positive(nu, "nu");
    return std::sqrt(units::hbar * wavenumber * wavenumber / (2.0 * mass * nu));
}

DerivedRates derived_rates(complex chi1, complex chi2) {
    const double abs1 = std::abs(chi1);
    const double abs2 = std::abs(chi2);
    if (abs1 == 0.0) {
        throw DegenerateCoupling("chi1 = 0: squeezing ratio r = |chi2/chi1| is undefined");
    }
    DerivedRates rates;
    rates.r = abs2 / abs1;
    rates.beta = std::arg(chi1) + std::arg(chi2);
    if (abs2 > abs1) {
        // (|chi2| - |chi1|)(|chi2| + |chi1|) avoids cancellation near r = 1.
        const double theta = std::sqrt((abs2 - abs1) * (abs2 + abs1));
        const double r2 = rates.r * rates.r;
        rates.theta_rate = theta;
        rates.t_pi = units::pi / theta;
        rates.n_mean = 4.0 * r2 / ((1.0 - r2) * (1.0 - r2));
    }
    return rates;
}

ChiPair chi_from_params(const PhysicalParams& p) {
    const double eta = lamb_dicke(p.mass, p.wavenumber, p.nu);
    const double cos_l = std::cos(p.theta_L);
    const double cos_c = std::cos(p.theta_c);

    const complex lower = sideband(p.delta - p.nu, p.gamma, "delta - nu");
    const complex upper = sideband(p.delta + p.nu, p.gamma, "delta + nu");
    complex carrier{0.0, 0.0};
    if ((p.alpha1 != 0.0 || p.alpha2 != 0.0) && cos_c != 0.0) {
        carrier = sideband(p.delta, p.gamma, "delta");
    }

    ChiPair out;
    out.chi1 = eta * std::conj(p.g1) * p.omega_rabi * (cos_l * lower - p.alpha1 * cos_c * carrier);
    out.chi2 = eta * std::conj(p.g2) * p.omega_rabi * (cos_l * upper - p.alpha2 * cos_c * carrier);
    return out;
}

Couplings coupling_constants(const PhysicalParams& params) {
    params.validate();
    const ChiPair chi = chi_from_params(params);
    const DerivedRates rates = derived_rates(chi.chi1, chi.chi2);

    Couplings c;
    c.chi1 = chi.chi1;
    c.chi2 = chi.chi2;
    c.eta = lamb_dicke(params.mass, params.wavenumber, params.nu);
    c.theta_rate = rates.theta_rate;
    c.r = rates.r;
    c.beta = rates.beta;
    c.t_pi = rates.t_pi;
    c.n_mean = rates.n_mean;
    return c;
}

const RegimeCheck* RegimeReport::find(std::string_view id) const {
    for (const auto& check : checks) {
        if (check.id == id) {
            return &check;
        }
    }
    return nullptr;
}

RegimeReport validate_regime(const PhysicalParams& p, const Couplings& c,
                             double much_greater_ratio, double soft_ratio) {
    if (!(much_greater_ratio > 1.0)) {
        throw InvalidParameter("much_greater_ratio must be > 1");
    }
    if (!(soft_ratio > 0.0)) {
        throw InvalidParameter("soft ratio must be > 0");
    }
    using K = QuantityKind;
    const double ratio = much_greater_ratio;
    const double abs_delta = std::abs(p.delta);
    const double delta2 = p.delta * p.delta;
    const std::optional<double> theta = c.theta_rate;
    const std::optional<double> pulse = p.pulse_length_T ? p.pulse_length_T : c.t_pi;

    RegimeReport report;
    report.much_greater_ratio = ratio;
    report.soft_ratio = soft_ratio;
    auto& v = report.checks;

    v.push_back(much_greater("detuning_vs_trap", "|Delta| >> nu", abs_delta, p.nu, ratio,
                             K::angular_frequency));
    v.push_back(much_greater("detuning_vs_linewidth", "|Delta| >> gamma", abs_delta, p.gamma,
                             ratio, K::angular_frequency));
    v.push_back(much_greater("trap_vs_theta", "nu >> Theta", p.nu, theta, ratio,
                             K::angular_frequency));
    v.push_back(much_greater("theta_vs_kappa", "Theta >> kappa", theta, p.kappa, ratio,
                             K::angular_frequency));
    v.push_back(much_greater("kappa_vs_scattering_1", "kappa >> gamma |g1|^2/Delta^2", p.kappa,
                             p.gamma * std::norm(p.g1) / delta2, ratio, K::angular_frequency));
    v.push_back(much_greater("kappa_vs_scattering_2", "kappa >> gamma |g2|^2/Delta^2", p.kappa,
                             p.gamma * std::norm(p.g2) / delta2, ratio, K::angular_frequency));
    v.push_back(much_greater("theta_vs_motional_scattering",
                             "Theta >> eta^2 gamma Omega^2/Delta^2", theta,
                             c.eta * c.eta * p.gamma * p.omega_rabi * p.omega_rabi / delta2, ratio,
                             K::angular_frequency));
    std::optional<double> nu_t;
    if (pulse) {
        nu_t = p.nu * *pulse;
    }
    v.push_back(much_greater("sideband_resolution", "nu T >> 1", nu_t, 1.0, ratio,
                             K::dimensionless));
    v.push_back(much_greater("lamb_dicke", "1 >> eta", 1.0, c.eta, ratio, K::dimensionless));

    std::optional<double> kappa_tpi;
    if (c.t_pi) {
        kappa_tpi = p.kappa * *c.t_pi;
    }
    v.push_back(much_greater("kappa_t_pi", "1 >> kappa T_pi (soft)", 1.0, kappa_tpi, soft_ratio,
                             K::dimensionless, /*soft=*/true));

    report.pass = true;
    for (const auto& check : v) {
        if (!check.soft && !check.pass) {
            report.pass = false;
        }
    }
    return report;
}

std::string format_report(const RegimeReport& report) {
    auto show = [](const std::optional<double>& x, QuantityKind kind) {
        if (!x) {
            return std::string("n/a");
        }
        std::ostringstream os;
        os << std::setprecision(6);
        if (kind == QuantityKind::angular_frequency) {
            os << units::linear(*x) << " Hz";
        } else {
            os << *x;
        }
        return os.str();
    };

    std::size_t label_width = 10;
    for (const auto& check : report.checks) {
        label_width = std::max(label_width, check.label.size());
    }

    std::ostringstream out;
    out << "Regime check (\">>\" means ratio >= " << report.much_greater_ratio
        << "; soft ratio " << report.soft_ratio << "; frequencies shown /2pi)\n";
    out << std::left << std::setw(static_cast<int>(label_width)) << "constraint" << "  "
        << std::right << std::setw(16) << "left" << "  " << std::setw(16) << "right" << "  "
        << std::setw(12) << "margin" << "  " << "status\n";
    for (const auto& check : report.checks) {
        std::ostringstream margin;
        if (check.margin) {
            margin << std::setprecision(4) << *check.margin;
        } else {
            margin << "n/a";
        }
        const char* status = check.pass ? "pass" : "FAIL";
        if (check.soft) {
            status = check.pass ? "pass (soft)" : "warn (soft)";
        }
        out << std::left << std::setw(static_cast<int>(label_width)) << check.label << "  "
            << std::right << std::setw(16) << show(check.left, check.kind) << "  "
            << std::setw(16) << show(check.right, check.kind) << "  " << std::setw(12)
            << margin.str() << "  " << status << '\n';
    }
    out << "verdict: " << (report.pass ? "PASS" : "FAIL") << '\n';
    return out.str();
}

}  // namespace entpulse
