#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lppl {

/// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
    input,                 ///< bad caller-supplied value (date, range, path)
    format,                ///< unparseable file content
    validation,            ///< parsed content violates a data invariant
    empty_window,          ///< too few observations in a requested window
    state,                 ///< operation not valid for the object's current state
    domain,                ///< model evaluated at or beyond the critical time
    degenerate_parameter,  ///< parameters not separately identifiable
    degenerate_design,     ///< rank-deficient least-squares design
    config,                ///< invalid or inconsistent configuration
    refinement_failed,     ///< local search never left degenerate territory
    fit_failed,            ///< every multistart refinement failed
    scan_failed,           ///< no window in a scan produced a fit
    indeterminate_regime,  ///< regime undefined (zero trend coefficient)
    unreliable_forecast,   ///< forecast requested from a non-converged fit
    generation,            ///< synthetic series violates series invariants
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::input: return "input";
        case ErrorKind::format: return "format";
        case ErrorKind::validation: return "validation";
        case ErrorKind::empty_window: return "empty-window";
        case ErrorKind::state: return "state";
        case ErrorKind::domain: return "domain";
        case ErrorKind::degenerate_parameter: return "degenerate-parameter";
        case ErrorKind::degenerate_design: return "degenerate-design";
        case ErrorKind::config: return "config";
        case ErrorKind::refinement_failed: return "refinement-failed";
        case ErrorKind::fit_failed: return "fit-failed";
        case ErrorKind::scan_failed: return "scan-failed";
        case ErrorKind::indeterminate_regime: return "indeterminate-regime";
        case ErrorKind::unreliable_forecast: return "unreliable-forecast";
        case ErrorKind::generation: return "generation";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace lppl
