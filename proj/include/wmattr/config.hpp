#pragma once

#include <filesystem>
#include <iosfwd>

#include "wmattr/channel.hpp"
#include "wmattr/experiment.hpp"

namespace wmattr {

// INI layout:
//
//   [experiment]  n, tau, s, samples_per_user, fdr_samples, seed, bound_source
//   [selection]   strategy, depth, bsta_node_budget
//   [channel]     beta | beta_min + beta_max, gamma, gamma_mode, postprocess
//   [postprocess:<name>]  mode, amount
//
// Missing keys keep their defaults. Unknown sections and keys are rejected so
// that typos do not silently fall back to defaults.

struct LoadedConfig {
    ExperimentConfig experiment;
    ProfileTable profiles;
    /// Whether [experiment] set the seed explicitly.
    bool seed_set = false;
};

LoadedConfig read_config(std::istream& in);
LoadedConfig read_config_file(const std::filesystem::path& path);

/// Writes every setting, so read_config(write_config(c)) == c.
void write_config(const LoadedConfig& cfg, std::ostream& out);

} // namespace wmattr
