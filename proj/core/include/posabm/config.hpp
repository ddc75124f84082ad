#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "posabm/sweep.hpp"

namespace posabm {

using Setting = std::pair<std::string, std::string>;

/// Flat "key = value" lines; '#' starts a comment. Throws std::runtime_error
/// with the line number on malformed input.
std::vector<Setting> parse_settings(std::istream& in);

/// Keys are the SimConfig / SweepSpec field names: n_nodes, avg_degree,
/// tau_block, tau_attestation, slot_duration, attestation_offset,
/// slots_per_epoch, horizon, seed, realisations, sweep_param, grid,
/// secondary, jobs. Unknown keys throw std::invalid_argument.
void apply_setting(SweepSpec& spec, std::string_view key, std::string_view value);

}  // namespace posabm
