#include "posabm/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace posabm {

std::string_view to_string(SweepParam p) {
    return p == SweepParam::tau_block ? "tau_block" : "tau_attestation";
}

SweepParam parse_sweep_param(std::string_view text) {
    if (text == "tau_block" || text == "tau-block") return SweepParam::tau_block;
    if (text == "tau_attestation" || text == "tau-attestation") return SweepParam::tau_attestation;
    throw std::invalid_argument(
        fmt::format("unknown sweep parameter '{}' (tau_block or tau_attestation)", text));
}

std::vector<double> log_grid(double min, double max, std::size_t points) {
    if (!(min > 0.0) || !(max >= min) || points == 0)
        throw std::invalid_argument("log grid needs 0 < min <= max and at least one point");
    if (points == 1) return {min};
    std::vector<double> grid(points);
    const double step = std::log(max / min) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = min * std::exp(step * static_cast<double>(i));
    grid.back() = max;
    return grid;
}

std::vector<double> linear_grid(double min, double max, std::size_t points) {
    if (!(max >= min) || points == 0)
        throw std::invalid_argument("linear grid needs min <= max and at least one point");
    if (points == 1) return {min};
    std::vector<double> grid(points);
    const double step = (max - min) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = min + step * static_cast<double>(i);
    grid.back() = max;
    return grid;
}

namespace {

double to_double(std::string_view text) {
    const std::string s(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
        throw std::invalid_argument(fmt::format("'{}' is not a number", text));
    return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
    if (text.find(':') != std::string_view::npos) {
        const auto parts = split(text, ':');
        if (parts.size() < 3 || parts.size() > 4)
            throw std::invalid_argument(fmt::format("grid '{}' is not min:max:points[:log|lin]", text));
        const double min = to_double(parts[0]);
        const double max = to_double(parts[1]);
        const double points = to_double(parts[2]);
        if (points < 1 || points != std::floor(points))
            throw std::invalid_argument("grid point count must be a positive integer");
        const auto n = static_cast<std::size_t>(points);
        if (parts.size() == 3 || parts[3] == "log") return log_grid(min, max, n);
        if (parts[3] == "lin") return linear_grid(min, max, n);
        throw std::invalid_argument(fmt::format("grid spacing '{}' is not log or lin", parts[3]));
    }
    std::vector<double> grid;
    for (auto part : split(text, ',')) grid.push_back(to_double(part));
    return grid;
}

void SweepSpec::validate() const {
    base.validate();
    if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
    for (double v : grid)
        if (!(v > 0.0)) throw std::invalid_argument("sweep grid values must be positive");
    for (double v : secondary)
        if (!(v > 0.0)) throw std::invalid_argument("secondary values must be positive");
    if (realisations < 1) throw std::invalid_argument("realisations must be at least 1");
}

std::vector<double> SweepSpec::secondary_values() const {
    if (!secondary.empty()) return secondary;
    return {param == SweepParam::tau_block ? base.tau_attestation : base.tau_block};
}

SimConfig SweepSpec::point_config(std::size_t point) const {
    const auto other = secondary_values();
    SimConfig c = base;
    const double swept = grid.at(point % grid.size());
    const double fixed = other.at(point / grid.size());
    if (param == SweepParam::tau_block) {
        c.tau_block = swept;
        c.tau_attestation = fixed;
    } else {
        c.tau_attestation = swept;
        c.tau_block = fixed;
    }
    return c;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point, std::uint64_t realisation) {
    std::uint64_t z = splitmix64(master);
    z = splitmix64(z ^ splitmix64(point));
    z = splitmix64(z ^ splitmix64(realisation));
    return z;
}

bool SweepResult::any_failed() const {
    return std::any_of(rows.begin(), rows.end(), [](const auto& r) { return !r.report; });
}

std::pair<double, double> mean_sd(const std::vector<double>& values) {
    if (values.empty()) return {std::nan(""), std::nan("")};
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    if (values.size() == 1) return {mean, 0.0};
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

SweepResult run_sweep(const SweepSpec& spec,
                      const std::function<void(std::size_t, std::size_t)>& progress) {
    spec.validate();
    const std::size_t points = spec.point_count();
    const std::size_t total = points * spec.realisations;

    SweepResult result;
    result.rows.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        auto& row = result.rows[i];
        row.point = i / spec.realisations;
        row.realisation = i % spec.realisations;
        row.config = spec.point_config(row.point);
        row.config.seed = derive_seed(spec.master_seed, row.point, row.realisation);
    }

    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex progress_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            auto& row = result.rows[i];
            try {
                row.report = make_report(run(row.config));
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(++done, total);
            }
        }
    };
    std::size_t jobs = spec.jobs ? spec.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, total);
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    for (std::size_t p = 0; p < points; ++p) {
        const SimConfig c = spec.point_config(p);
        PointSummary s;
        s.point = p;
        s.tau_block = c.tau_block;
        s.tau_attestation = c.tau_attestation;
        std::vector<double> mu, F, margin;
        for (std::size_t r = 0; r < spec.realisations; ++r) {
            const auto& row = result.rows[p * spec.realisations + r];
            if (!row.report) {
                ++s.failed;
                continue;
            }
            ++s.succeeded;
            mu.push_back(row.report->mu);
            F.push_back(row.report->F);
            margin.push_back(row.report->threshold_margin);
        }
        std::tie(s.mu_mean, s.mu_sd) = mean_sd(mu);
        std::tie(s.F_mean, s.F_sd) = mean_sd(F);
        s.margin_mean = mean_sd(margin).first;
        try {
            s.predicted_margin =
                predicted_threshold_margin(c.n_nodes, c.avg_degree, c.tau_block, c.slot_duration);
        } catch (const std::exception&) {
            s.predicted_margin = std::nan("");
        }
        result.points.push_back(s);
    }
    return result;
}

namespace {

std::string sanitize(std::string text) {
    std::replace_if(text.begin(), text.end(), [](char ch) { return ch == ',' || ch == '\n'; }, ';');
    return text;
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += fmt::format("{}{}", i ? ";" : "", values[i]);
    return out;
}

constexpr std::string_view kAggregateHeader =
    "point,tau_block,tau_attestation,realisations,failed,mu_mean,mu_sd,F_mean,F_sd,"
    "threshold_margin,predicted_margin";

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepSpec& spec, const SweepResult& result) {
    out << fmt::format("# posabm sweep csv v{}\n", kCsvSchemaVersion);
    out << fmt::format(
        "# sweep_param={} grid={} secondary={} realisations={} master_seed={} n={} avg_degree={} "
        "slot_duration={} attestation_offset={} slots_per_epoch={} horizon={}\n",
        to_string(spec.param), join(spec.grid), join(spec.secondary_values()), spec.realisations,
        spec.master_seed, spec.base.n_nodes, spec.base.avg_degree, spec.base.slot_duration,
        spec.base.attestation_offset, spec.base.slots_per_epoch, spec.base.horizon);
    out << "point,realisation,";
    const auto columns = report_columns();
    for (auto* col : columns) out << col << ',';
    out << "status\n";
    for (const auto& row : result.rows) {
        out << row.point << ',' << row.realisation << ',';
        if (row.report) {
            std::ostringstream line;
            write_report_row(line, *row.report);
            auto text = line.str();
            text.pop_back();
            out << text << ",ok\n";
        } else {
            const auto& c = row.config;
            out << fmt::format("{},{},{},{},{},{},{},,,,,,,,error: {}\n", c.seed, c.n_nodes,
                               c.avg_degree, c.tau_block, c.tau_attestation, c.slot_duration,
                               c.horizon, sanitize(row.error));
        }
    }
    out << "# aggregate\n" << kAggregateHeader << '\n';
    for (const auto& s : result.points) {
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", s.point, s.tau_block,
                           s.tau_attestation, s.succeeded, s.failed, s.mu_mean, s.mu_sd, s.F_mean,
                           s.F_sd, s.margin_mean, s.predicted_margin);
    }
}

CsvError::CsvError(std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line) {}

std::string summarize(std::istream& csv) {
    std::string line;
    std::size_t line_no = 0;
    std::string swept = "tau_block";
    bool in_aggregate = false;
    std::string header_text;
    std::map<std::string, std::size_t> column;
    std::vector<PointSummary> points;

    while (std::getline(csv, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.starts_with("#")) {
            if (line.starts_with("# aggregate")) in_aggregate = true;
            if (auto pos = line.find("sweep_param="); pos != std::string::npos) {
                swept = line.substr(pos + 12, line.find(' ', pos) - pos - 12);
            }
            continue;
        }
        if (!in_aggregate) continue;
        if (column.empty()) {
            header_text = line;
            std::size_t i = 0;
            for (auto name : split(header_text, ',')) column[std::string(name)] = i++;
            for (const char* need : {"tau_block", "tau_attestation", "realisations", "failed",
                                     "mu_mean", "mu_sd", "F_mean", "F_sd", "threshold_margin",
                                     "predicted_margin"}) {
                if (!column.contains(need))
                    throw CsvError(line_no, fmt::format("aggregate header lacks '{}'", need));
            }
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != column.size()) {
            throw CsvError(line_no, fmt::format("expected {} fields, found {}", column.size(),
                                                fields.size()));
        }
        auto num = [&](const char* name) {
            try {
                return to_double(fields[column.at(name)]);
            } catch (const std::invalid_argument& e) {
                throw CsvError(line_no, fmt::format("column {}: {}", name, e.what()));
            }
        };
        PointSummary s;
        s.point = points.size();
        s.tau_block = num("tau_block");
        s.tau_attestation = num("tau_attestation");
        s.succeeded = static_cast<std::size_t>(num("realisations"));
        s.failed = static_cast<std::size_t>(num("failed"));
        s.mu_mean = num("mu_mean");
        s.mu_sd = num("mu_sd");
        s.F_mean = num("F_mean");
        s.F_sd = num("F_sd");
        s.margin_mean = num("threshold_margin");
        s.predicted_margin = num("predicted_margin");
        points.push_back(s);
    }
    if (!in_aggregate) throw CsvError(line_no, "no \"# aggregate\" section");
    if (points.empty()) return "no data\n";

    const bool by_block = swept != "tau_attestation";
    std::string out = fmt::format("{:>12} {:>12} {:>19} {:>19} {:>10} {:>10}\n", "tau_block",
                                  "tau_att", "mu mean+-sd", "F mean+-sd", "margin", "ER margin");
    auto sign = [](double v) { return std::isnan(v) ? 0 : (v > 0 ? 1 : -1); };
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& s = points[i];
        out += fmt::format("{:>12.4g} {:>12.4g} {:>10.4f}+-{:<7.4f} {:>10.4f}+-{:<7.4f} {:>+10.3f} "
                           "{:>+10.3f}",
                           s.tau_block, s.tau_attestation, s.mu_mean, s.mu_sd, s.F_mean, s.F_sd,
                           s.margin_mean, s.predicted_margin);
        if (s.failed) out += fmt::format("  [{} failed]", s.failed);
        if (i > 0) {
            const auto& prev = points[i - 1];
            const bool same_series = by_block ? prev.tau_attestation == s.tau_attestation
                                              : prev.tau_block == s.tau_block;
            if (same_series) {
                if (sign(prev.margin_mean) * sign(s.margin_mean) < 0) out += "  <- margin sign change";
                if (sign(prev.predicted_margin) * sign(s.predicted_margin) < 0)
                    out += "  <- ER margin sign change";
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace posabm
