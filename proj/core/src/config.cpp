#include "posabm/config.hpp"

#include <charconv>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace posabm {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument(fmt::format("{}: '{}' is not a valid number", key, value));
    }
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    if (value == "inf" || value == "infinity") return std::numeric_limits<double>::infinity();
    return parse_number<double>(key, value);
}

}  // namespace

std::vector<Setting> parse_settings(std::istream& in) {
    std::vector<Setting> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = line;
        if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw std::runtime_error(fmt::format("config line {}: expected key = value", line_no));
        }
        auto key = trim(text.substr(0, eq));
        auto value = trim(text.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::runtime_error(fmt::format("config line {}: empty key or value", line_no));
        }
        out.emplace_back(std::string(key), std::string(value));
    }
    return out;
}

void apply_setting(SweepSpec& spec, std::string_view key, std::string_view value) {
    auto& c = spec.base;
    if (key == "n_nodes") c.n_nodes = parse_number<std::size_t>(key, value);
    else if (key == "avg_degree") c.avg_degree = parse_real(key, value);
    else if (key == "tau_block") c.tau_block = parse_real(key, value);
    else if (key == "tau_attestation") c.tau_attestation = parse_real(key, value);
    else if (key == "slot_duration") c.slot_duration = parse_real(key, value);
    else if (key == "attestation_offset") c.attestation_offset = parse_real(key, value);
    else if (key == "slots_per_epoch") c.slots_per_epoch = parse_number<std::size_t>(key, value);
    else if (key == "horizon") c.horizon = parse_real(key, value);
    else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, value);
        spec.master_seed = c.seed;
    }
    else if (key == "realisations") spec.realisations = parse_number<std::size_t>(key, value);
    else if (key == "sweep_param") spec.param = parse_sweep_param(value);
    else if (key == "grid") spec.grid = parse_grid(value);
    else if (key == "secondary") spec.secondary = parse_grid(value);
    else if (key == "jobs") spec.jobs = parse_number<std::size_t>(key, value);
    else throw std::invalid_argument(fmt::format("unknown config key '{}'", key));
}

}  // namespace posabm
