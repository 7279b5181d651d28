#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dbec {

/// Invalid configuration or precondition violation at an API boundary.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// NaN/Inf detected during numerics. `where` names the failing sub-step.
struct NumericFault : std::runtime_error {
    explicit NumericFault(const std::string& where_)
        : std::runtime_error("numeric fault in " + where_), where(where_) {}
    std::string where;
};

/// Iteration failed to reach its tolerance; carries the recorded history.
struct NonConvergence : std::runtime_error {
    NonConvergence(const std::string& msg, std::vector<double> history)
        : std::runtime_error(msg), energy_history(std::move(history)) {}
    std::vector<double> energy_history;
};

} // namespace dbec
