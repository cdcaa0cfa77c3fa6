#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "entpulse/config.hpp"
#include "entpulse/fock_oracle.hpp"
#include "entpulse/params.hpp"
#include "entpulse/protocol.hpp"

namespace entpulse::cli {

// Exit-code contract.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;    // usage, parse or IO error
inline constexpr int exit_physics = 2;  // regime failure, oracle mismatch

// Everything a subcommand may read from the config file. Physical keys use
// the _hz convention of params_from_config; the rest are run settings.
struct RunConfig {
    KeyValueConfig raw;
    std::optional<PhysicalParams> params;

    double much_greater_ratio = default_much_greater_ratio;
    double soft_ratio = default_soft_ratio;
    bool include_decay = false;

    HomodyneSettings homodyne;  // t_grid filled from t_max / t_step
    std::vector<double> r_list = default_fig3_r_values();

    std::optional<double> seq_t1;  // s; defaults to 1/|chi1|
    double seq_kappa_T12 = 10.0;
    double seq_swap_area = units::pi / 2.0;

    std::vector<double> oracle_r{3.0};
    std::optional<fock::Dims> oracle_dims;
};

// Keys accepted in a config file (physical + run settings).
std::vector<std::string_view> known_keys();

// Parses the run settings and, when require_params, the physical block.
// Throws ConfigError on unknown keys, malformed values or missing keys.
RunConfig load_run_config(const KeyValueConfig& raw, bool require_params);

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace entpulse::cli
