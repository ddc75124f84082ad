#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "posabm/engine.hpp"
#include "posabm/metrics.hpp"

namespace posabm {

enum class SweepParam { tau_block, tau_attestation };

std::string_view to_string(SweepParam p);
SweepParam parse_sweep_param(std::string_view text);

std::vector<double> log_grid(double min, double max, std::size_t points);
std::vector<double> linear_grid(double min, double max, std::size_t points);
/// "min:max:points[:log|:lin]" (log by default) or an explicit "a,b,c" list.
std::vector<double> parse_grid(std::string_view text);

struct SweepSpec {
    SimConfig base;
    SweepParam param = SweepParam::tau_block;
    /// Values of the swept latency. Defaults to 25 log-spaced points over [0.1, 900].
    std::vector<double> grid = log_grid(0.1, 900.0, 25);
    /// Values of the other latency; empty means the base config's value.
    std::vector<double> secondary;
    std::size_t realisations = 20;
    std::uint64_t master_seed = 1;
    /// Worker threads; 0 picks the hardware concurrency.
    std::size_t jobs = 0;

    void validate() const;
    std::vector<double> secondary_values() const;
    std::size_t point_count() const { return grid.size() * secondary_values().size(); }
    /// Config of a grid point; points run secondary-major, grid-minor.
    SimConfig point_config(std::size_t point) const;
};

/// Seed of one realisation: splitmix64 applied to the master seed, then
/// folded with the point index, then with the realisation index. Each step
/// is z = splitmix64(z ^ splitmix64(x)).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point, std::uint64_t realisation);

struct RealisationResult {
    std::size_t point = 0;
    std::size_t realisation = 0;
    SimConfig config;
    std::optional<ConsensusReport> report;
    std::string error;
};

struct PointSummary {
    std::size_t point = 0;
    double tau_block = 0.0;
    double tau_attestation = 0.0;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    double mu_mean = 0.0;
    double mu_sd = 0.0;
    double F_mean = 0.0;
    double F_sd = 0.0;
    double margin_mean = 0.0;
    double predicted_margin = 0.0;
};

struct SweepResult {
    std::vector<RealisationResult> rows;  // ordered by (point, realisation)
    std::vector<PointSummary> points;

    bool any_failed() const;
};

/// Runs every realisation of every point. Failures are caught per
/// realisation; the sweep always completes. `progress` is called with the
/// number of finished realisations (from worker threads, serialized).
SweepResult run_sweep(const SweepSpec& spec,
                      const std::function<void(std::size_t, std::size_t)>& progress = {});

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_sd(const std::vector<double>& values);

inline constexpr int kCsvSchemaVersion = 1;

/// Per-realisation section, then an aggregate section introduced by the
/// "# aggregate" comment line.
void write_sweep_csv(std::ostream& out, const SweepSpec& spec, const SweepResult& result);

class CsvError : public std::runtime_error {
public:
    CsvError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Reads the aggregate section of a sweep CSV and renders one line per grid
/// point, flagging points where a threshold margin changes sign.
std::string summarize(std::istream& csv);

}  // namespace posabm
