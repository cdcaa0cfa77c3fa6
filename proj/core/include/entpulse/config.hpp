#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "entpulse/params.hpp"

namespace entpulse {

// Flat "key = value" file. One key per line, '#' starts a comment, blank
// lines are ignored. Duplicate keys and lines without '=' are errors.
// Every error carries the 1-based line number.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in);
    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::filesystem::path& path);

    bool has(std::string_view key) const;
    int line_of(std::string_view key) const;
    std::vector<std::string> keys() const;

    std::optional<std::string> get_string(std::string_view key) const;
    std::optional<double> get_double(std::string_view key) const;
    double require_double(std::string_view key) const;
    // Comma- and/or whitespace-separated numbers.
    std::optional<std::vector<double>> get_list(std::string_view key) const;

    // Throws ConfigError naming the first key not in `allowed`.
    void reject_unknown(std::span<const std::string_view> allowed) const;

    void set(std::string key, std::string value, int line = 0);

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::map<std::string, Entry, std::less<>> entries_;
};

// Keys understood by params_from_config. Frequencies carry an _hz suffix and
// are linear frequencies; they are multiplied by 2 pi on ingestion.
//   required: nu_hz gamma_hz delta_hz omega_rabi_hz kappa_hz g1_hz g2_hz mass
//             and one of wavenumber (1/m) or wavelength (m)
//   optional: g1_phase g2_phase (rad), alpha1 alpha2, theta_L theta_c (rad),
//             nbar_motion, pulse_length_T (s)
std::span<const std::string_view> physical_param_keys();

// Validates the result (PhysicalParams::validate) before returning it.
PhysicalParams params_from_config(const KeyValueConfig& config);

}  // namespace entpulse
