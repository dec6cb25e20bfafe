#pragma once

#include <string>

#include "config.hpp"

namespace sarcf::cli {

struct CommandOptions {
    std::string out_dir = ".";
    int jobs = 1;
};

// Each command writes its outputs under opts.out_dir (created if
// missing); files are written atomically.
void cmd_network(const RunConfig& cfg, const CommandOptions& opts);
void cmd_effects(const RunConfig& cfg, const CommandOptions& opts);
void cmd_fit(const RunConfig& cfg, const CommandOptions& opts);
void cmd_mc(const RunConfig& cfg, const CommandOptions& opts);
void cmd_regimes(const CommandOptions& opts);

} // namespace sarcf::cli
