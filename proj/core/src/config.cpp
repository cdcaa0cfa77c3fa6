#include "entpulse/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "entpulse/errors.hpp"

namespace entpulse {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double to_double(std::string_view text, std::string_view key, int line) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError("value of '" + std::string(key) + "' is not a number: '" +
                              std::string(text) + "'",
                          line);
    }
    return value;
}

constexpr std::array<std::string_view, 18> kParamKeys{
    "nu_hz",    "gamma_hz", "delta_hz", "omega_rabi_hz", "kappa_hz",   "g1_hz",
    "g2_hz",    "g1_phase", "g2_phase", "alpha1",        "alpha2",     "theta_L",
    "theta_c",  "mass",     "wavenumber", "wavelength",  "nbar_motion", "pulse_length_T"};

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    KeyValueConfig config;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("expected 'key = value'", line_no);
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("missing key before '='", line_no);
        }
        if (value.empty()) {
            throw ConfigError("missing value for '" + std::string(key) + "'", line_no);
        }
        if (config.has(key)) {
            throw ConfigError("duplicate key '" + std::string(key) + "' (first on line " +
                                  std::to_string(config.line_of(key)) + ")",
                              line_no);
        }
        config.set(std::string(key), std::string(value), line_no);
    }
    return config;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    return parse(in);
}

bool KeyValueConfig::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

int KeyValueConfig::line_of(std::string_view key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
}

std::vector<std::string> KeyValueConfig::keys() const {
    std::vector<std::string> out;
    for (const auto& [key, entry] : entries_) {
        out.push_back(key);
    }
    return out;
}

std::optional<std::string> KeyValueConfig::get_string(std::string_view key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second.value;
}

std::optional<double> KeyValueConfig::get_double(std::string_view key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return to_double(it->second.value, key, it->second.line);
}

double KeyValueConfig::require_double(std::string_view key) const {
    const auto value = get_double(key);
    if (!value) {
        throw ConfigError("missing required key '" + std::string(key) + "'");
    }
    return *value;
}

std::optional<std::vector<double>> KeyValueConfig::get_list(std::string_view key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    std::string text = it->second.value;
    for (char& ch : text) {
        if (ch == ',') {
            ch = ' ';
        }
    }
    std::istringstream is(text);
    std::vector<double> values;
    for (std::string tok; is >> tok;) {
        values.push_back(to_double(tok, key, it->second.line));
    }
    if (values.empty()) {
        throw ConfigError("empty list for '" + std::string(key) + "'", it->second.line);
    }
    return values;
}

void KeyValueConfig::reject_unknown(std::span<const std::string_view> allowed) const {
    for (const auto& [key, entry] : entries_) {
        bool known = false;
        for (auto a : allowed) {
            if (a == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("unknown key '" + key + "'", entry.line);
        }
    }
}

void KeyValueConfig::set(std::string key, std::string value, int line) {
    entries_[std::move(key)] = Entry{std::move(value), line};
}

std::span<const std::string_view> physical_param_keys() { return kParamKeys; }

PhysicalParams params_from_config(const KeyValueConfig& c) {
    PhysicalParams p;
    p.nu = units::angular(c.require_double("nu_hz"));
    p.gamma = units::angular(c.require_double("gamma_hz"));
    p.delta = units::angular(c.require_double("delta_hz"));
    p.omega_rabi = units::angular(c.require_double("omega_rabi_hz"));
    p.kappa = units::angular(c.require_double("kappa_hz"));
    p.g1 = std::polar(units::angular(c.require_double("g1_hz")), c.get_double("g1_phase").value_or(0.0));
    p.g2 = std::polar(units::angular(c.require_double("g2_hz")), c.get_double("g2_phase").value_or(0.0));
    p.alpha1 = c.get_double("alpha1").value_or(p.alpha1);
    p.alpha2 = c.get_double("alpha2").value_or(p.alpha2);
    p.theta_L = c.get_double("theta_L").value_or(p.theta_L);
    p.theta_c = c.get_double("theta_c").value_or(p.theta_c);
    p.mass = c.require_double("mass");
    p.nbar_motion = c.get_double("nbar_motion").value_or(0.0);
    if (const auto t = c.get_double("pulse_length_T")) {
        p.pulse_length_T = *t;
    }

    const auto k = c.get_double("wavenumber");
    const auto lambda = c.get_double("wavelength");
    if (k && lambda) {
        throw ConfigError("give either 'wavenumber' or 'wavelength', not both",
                          std::max(c.line_of("wavelength"), c.line_of("wavenumber")));
    }
    if (!k && !lambda) {
        throw ConfigError("missing required key 'wavenumber' (or 'wavelength')");
    }
    if (lambda) {
        if (!(*lambda > 0.0)) {
            throw ConfigError("wavelength must be positive", c.line_of("wavelength"));
        }
        p.wavenumber = units::two_pi / *lambda;
    } else {
        p.wavenumber = *k;
    }

    try {
        p.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("invalid physical parameters: ") + e.what());
    }
    return p;
}

}  // namespace entpulse
