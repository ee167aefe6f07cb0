#include "edgesr/simulator.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <sstream>

#include "edgesr/error.hpp"
#include "edgesr/rng.hpp"
#include "edgesr/stitcher.hpp"

namespace edgesr {

void Scenario::validate() const {
    profile.validate();
    sa_params.validate();
    AllocationRatio{gamma};
    if (!(capacity_scale > 0.0 && capacity_scale <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "capacity_scale must lie in (0, 1]");
    }
    if (!(round_seconds > 0.0)) fail(ErrorCode::InvalidArgument, "round_seconds must be > 0");
    if (grid_side <= 0) fail(ErrorCode::InvalidArgument, "grid_side must be positive");
    if (overlap < 0) fail(ErrorCode::InvalidArgument, "overlap must be non-negative");
}

SystemProfile Scenario::effective_profile() const {
    return profile.with_edge_scale(capacity_scale);
}

CapacityLimits Scenario::limits() const {
    return CapacityLimits::from_profile(effective_profile(), round_seconds);
}

Scenario default_scenario(std::uint64_t seed, int users) {
    static constexpr std::array<int, 4> kTargets{768, 1024, 1536, 2048};
    static constexpr std::array<double, 3> kLambdas{0.01, 0.02, 0.05};
    Scenario s;
    s.sa_params.rng_seed = seed;
    Rng rng(Rng::derive(seed, 0xC0FFEE));
    for (int k = 0; k < users; ++k) {
        Request r;
        char id[16];
        std::snprintf(id, sizeof id, "u%02d", k);
        r.id = id;
        r.target_resolution = kTargets[static_cast<std::size_t>(k) % kTargets.size()];
        r.lambda = kLambdas[rng.index(kLambdas.size())];
        r.prompt_seed = rng.next() >> 32;
        s.requests.push_back(std::move(r));
    }
    return s;
}

Image synth_image(std::uint64_t seed, int resolution, int align) {
    if (resolution <= 0) fail(ErrorCode::InvalidArgument, "resolution must be positive");
    if (align <= 0) fail(ErrorCode::InvalidArgument, "alignment must be positive");
    Rng rng(seed);
    // Per-channel gradient and bump coefficients keep the background smooth.
    std::array<double, 3> base{}, gx{}, gy{}, bump{};
    for (int c = 0; c < 3; ++c) {
        base[c] = 0.30 + 0.20 * rng.uniform();
        gx[c] = 0.15 * (rng.uniform() - 0.5);
        gy[c] = 0.15 * (rng.uniform() - 0.5);
        bump[c] = 0.10 * rng.uniform();
    }
    const int side = std::max(1, resolution / 2);
    const int span = resolution - side;
    int px = span > 0 ? static_cast<int>(rng.index(static_cast<std::uint64_t>(span) + 1)) : 0;
    int py = span > 0 ? static_cast<int>(rng.index(static_cast<std::uint64_t>(span) + 1)) : 0;
    px -= px % align;
    py -= py % align;

    Image img(resolution, resolution, 3);
    const double inv = 1.0 / resolution;
    for (int y = 0; y < resolution; ++y) {
        const double v = (y + 0.5) * inv;
        for (int x = 0; x < resolution; ++x) {
            const double u = (x + 0.5) * inv;
            const bool textured = x >= px && x < px + side && y >= py && y < py + side;
            for (int c = 0; c < 3; ++c) {
                double value;
                if (textured) {
                    value = rng.uniform();
                } else {
                    value = base[c] + gx[c] * (u - 0.5) + gy[c] * (v - 0.5) +
                            bump[c] * 16.0 * u * (1.0 - u) * v * (1.0 - v);
                }
                img.at(x, y, c) = std::clamp(value, 0.0, 1.0);
            }
        }
    }
    return img;
}

TaskRecord run_task(const Request& request, const Configuration& config,
                    const AllocationRatio& gamma, const SystemProfile& profile,
                    bool execute_pixels, int grid_side, int overlap) {
    TaskRecord rec;
    rec.request_id = request.id;
    rec.config = config;
    rec.lambda = request.lambda;
    rec.latency = latency_total(request, config, gamma, profile);
    rec.quality = quality_final(request, config, gamma, profile);
    rec.utility = utility(rec.quality, rec.latency.total, request.lambda);
    rec.feasible = true;
    if (execute_pixels) {
        const int r = initial_resolution(request.target_resolution, config.sr_scale);
        const Image source = synth_image(request.prompt_seed, r);
        const auto out = hybrid_enhance(source, grid_side, gamma, config.sr_scale, overlap);
        if (out.image.width != request.target_resolution ||
            out.image.height != request.target_resolution) {
            fail(ErrorCode::DimensionMismatch,
                 "request '" + request.id + "': enhanced image does not match the target size");
        }
    }
    return rec;
}

namespace {

double nearest_rank(std::vector<double> values, double pct) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return values[rank - 1];
}

void summarize(ScenarioReport& report) {
    std::vector<double> latencies;
    double quality_sum = 0;
    report.total_utility = 0;
    report.feasible_count = 0;
    for (const auto& r : report.records) {
        report.total_utility += r.utility;
        if (!r.feasible) continue;
        ++report.feasible_count;
        latencies.push_back(r.latency.total);
        quality_sum += r.quality;
    }
    if (report.feasible_count > 0) {
        double lat_sum = 0;
        for (double l : latencies) lat_sum += l;
        report.mean_latency = lat_sum / report.feasible_count;
        report.mean_quality = quality_sum / report.feasible_count;
    }
    report.p50_latency = nearest_rank(latencies, 50);
    report.p95_latency = nearest_rank(latencies, 95);
}

}  // namespace

ScenarioReport run_scenario(const Scenario& scenario) {
    scenario.validate();
    const AllocationRatio gamma(scenario.gamma);
    const SystemProfile profile = scenario.effective_profile();

    ScenarioReport report;
    report.policy = scenario.policy;

    std::vector<Request> valid;
    std::vector<std::optional<std::string>> invalid(scenario.requests.size());
    for (std::size_t k = 0; k < scenario.requests.size(); ++k) {
        try {
            valid.push_back(validate_request(scenario.requests[k], scenario.sets, scenario.grid_side));
        } catch (const Error& e) {
            invalid[k] = std::string(to_string(e.code())) + ": " + e.what();
        }
    }
    report.schedule = schedule(valid, gamma, profile, scenario.sets, scenario.sa_params,
                               scenario.policy, scenario.limits());

    std::size_t next_valid = 0;
    for (std::size_t k = 0; k < scenario.requests.size(); ++k) {
        const Request& req = scenario.requests[k];
        TaskRecord rec;
        rec.request_id = req.id;
        rec.lambda = req.lambda;
        if (invalid[k]) {
            rec.error = invalid[k];
        } else {
            const ScheduledTask& task = report.schedule.tasks[next_valid++];
            if (task.config) {
                try {
                    rec = run_task(req, *task.config, gamma, profile, scenario.execute_pixels,
                                   scenario.grid_side, scenario.overlap);
                } catch (const Error& e) {
                    rec.config = task.config;
                    rec.error = std::string(to_string(e.code())) + ": " + e.what();
                }
            } else {
                rec.error = std::string(to_string(ErrorCode::NoFeasibleConfiguration)) + ": " +
                            task.error.value_or("");
            }
        }
        rec.policy = scenario.policy;
        report.records.push_back(std::move(rec));
    }
    summarize(report);
    return report;
}

const std::vector<Policy>& sweep_policies() {
    static const std::vector<Policy> kPolicies{Policy::SimulatedAnnealing, Policy::Random,
                                               Policy::NoSR, Policy::OneType};
    return kPolicies;
}

std::vector<CapacitySweepRow> sweep_capacity(const Scenario& scenario,
                                             const std::vector<double>& ratios) {
    std::vector<CapacitySweepRow> rows;
    for (double ratio : ratios) {
        for (Policy p : sweep_policies()) {
            Scenario s = scenario;
            s.policy = p;
            s.capacity_scale = scenario.capacity_scale * ratio;
            const auto report = run_scenario(s);
            CapacitySweepRow row;
            row.ratio = ratio;
            row.policy = p;
            const auto n = static_cast<double>(report.records.size());
            row.mean_utility = n > 0 ? report.total_utility / n : 0.0;
            row.mean_latency = report.mean_latency;
            row.feasible_count = report.feasible_count;
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<GammaSweepRow> sweep_gamma(const Scenario& scenario,
                                       const std::vector<double>& gammas) {
    Scenario base = scenario;
    base.execute_pixels = false;
    const auto report = run_scenario(base);
    const SystemProfile profile = base.effective_profile();

    std::vector<GammaSweepRow> rows;
    for (double g : gammas) {
        const AllocationRatio gamma(g);
        GammaSweepRow row;
        row.gamma = g;
        int n = 0;
        for (std::size_t k = 0; k < report.records.size(); ++k) {
            const auto& rec = report.records[k];
            if (!rec.feasible || !rec.config) continue;
            const auto t = run_task(base.requests[k], *rec.config, gamma, profile, false);
            row.mean_quality += t.quality;
            row.mean_t_sr_edge += t.latency.t_sr_edge;
            row.mean_t_enhance += t.latency.t_enhance;
            row.mean_utility += t.utility;
            ++n;
        }
        if (n > 0) {
            row.mean_quality /= n;
            row.mean_t_sr_edge /= n;
            row.mean_t_enhance /= n;
            row.mean_utility /= n;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string format_number(double value) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

std::string report_csv(const ScenarioReport& report) {
    std::ostringstream out;
    out << kReportHeader << '\n';
    for (const auto& r : report.records) {
        out << r.request_id << ',' << to_string(r.policy) << ',';
        if (r.config) {
            out << r.config->sr_scale << ',' << r.config->denoise_steps;
        } else {
            out << ',';
        }
        const auto& l = r.latency;
        for (double v : {l.t_gen, l.t_sr_edge, l.t_sr_device, l.t_tx_enhanced, l.t_tx_raw,
                         l.t_enhance, l.total, r.quality, r.utility}) {
            out << ',' << format_number(v);
        }
        out << ',' << (r.feasible ? "true" : "false") << '\n';
    }
    return out.str();
}

std::string capacity_sweep_csv(const std::vector<CapacitySweepRow>& rows) {
    std::ostringstream out;
    out << kCapacitySweepHeader << '\n';
    for (const auto& r : rows) {
        out << format_number(r.ratio) << ',' << to_string(r.policy) << ','
            << format_number(r.mean_utility) << ',' << format_number(r.mean_latency) << ','
            << r.feasible_count << '\n';
    }
    return out.str();
}

std::string gamma_sweep_csv(const std::vector<GammaSweepRow>& rows) {
    std::ostringstream out;
    out << kGammaSweepHeader << '\n';
    for (const auto& r : rows) {
        out << format_number(r.gamma) << ',' << format_number(r.mean_quality) << ','
            << format_number(r.mean_t_sr_edge) << ',' << format_number(r.mean_t_enhance) << ','
            << format_number(r.mean_utility) << '\n';
    }
    return out.str();
}

}  // namespace edgesr
