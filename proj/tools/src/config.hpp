#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "sarcf/mcharness.hpp"

namespace sarcf::cli {

// Any problem with the run configuration: unreadable file, malformed
// document, unknown key, wrong type, out-of-range value. Mapped to exit
// code 2 by the executable.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ExperimentConfig experiment;
    // Second assignment block for paired exogenous/confounded runs; its
    // mode must differ from the primary block.
    std::optional<AssignmentSpec> assignment_alt;
};

RunConfig default_run_config();

// Parses and validates a JSON config document. Unknown keys are
// rejected; every field is optional except "schema", which must be 1.
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::string& path);

} // namespace sarcf::cli
