#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgesr/domain.hpp"
#include "edgesr/image.hpp"
#include "edgesr/optimizer.hpp"
#include "edgesr/perf_models.hpp"

namespace edgesr {

struct Scenario {
    std::vector<Request> requests;
    SystemProfile profile = default_profile();
    CandidateSets sets = CandidateSets::defaults();
    double gamma = 0.25;
    Policy policy = Policy::SimulatedAnnealing;
    SAParams sa_params;
    double capacity_scale = 1.0;  // fraction of the edge capacity available
    // Length of the scheduling round; load budgets are capacity x round_seconds.
    double round_seconds = 300.0;
    bool execute_pixels = false;
    int grid_side = 4;
    int overlap = 16;

    void validate() const;
    CapacityLimits limits() const;
    SystemProfile effective_profile() const;
};

// Ten users, targets cycling through {768, 1024, 1536, 2048}, lambda drawn
// from {0.01, 0.02, 0.05}; `seed` drives the draws and the annealer.
Scenario default_scenario(std::uint64_t seed, int users = 10);

// `fallback_profile` is used when the file carries no "profile" object.
Scenario parse_scenario(const std::string& json_text,
                        const SystemProfile& fallback_profile = default_profile());
Scenario load_scenario(const std::string& path,
                       const SystemProfile& fallback_profile = default_profile());
std::string scenario_to_json(const Scenario& scenario);

// Smooth low-frequency RGB background plus a noise-textured square covering a
// quarter of the area. The square's corner is snapped to multiples of `align`.
Image synth_image(std::uint64_t seed, int resolution, int align = 1);

struct TaskRecord {
    std::string request_id;
    Policy policy = Policy::SimulatedAnnealing;
    std::optional<Configuration> config;
    LatencyBreakdown latency;
    double lambda = 0;
    double quality = 0;
    double utility = 0;
    bool feasible = false;
    std::optional<std::string> error;
};

TaskRecord run_task(const Request& request, const Configuration& config,
                    const AllocationRatio& gamma, const SystemProfile& profile,
                    bool execute_pixels, int grid_side = 4, int overlap = 16);

struct ScenarioReport {
    Policy policy = Policy::SimulatedAnnealing;
    std::vector<TaskRecord> records;  // request order
    ScheduleResult schedule;
    // Latency and quality statistics cover feasible tasks only.
    double mean_latency = 0;
    double p50_latency = 0;
    double p95_latency = 0;
    double mean_quality = 0;
    double total_utility = 0;
    int feasible_count = 0;
};

ScenarioReport run_scenario(const Scenario& scenario);

struct CapacitySweepRow {
    double ratio = 1;
    Policy policy = Policy::SimulatedAnnealing;
    double mean_utility = 0;
    double mean_latency = 0;
    int feasible_count = 0;
};

// Policies compared in sweeps: SA and the three baselines.
const std::vector<Policy>& sweep_policies();

std::vector<CapacitySweepRow> sweep_capacity(const Scenario& scenario,
                                             const std::vector<double>& ratios);

struct GammaSweepRow {
    double gamma = 0;
    double mean_quality = 0;
    double mean_t_sr_edge = 0;
    double mean_t_enhance = 0;
    double mean_utility = 0;
};

// Schedules once at the scenario's gamma, then re-evaluates those
// configurations under each allocation ratio.
std::vector<GammaSweepRow> sweep_gamma(const Scenario& scenario,
                                       const std::vector<double>& gammas);

// ---- CSV ----

inline constexpr const char* kReportHeader =
    "request_id,policy,scale,steps,t_gen,t_sr_edge,t_sr_device,t_tx_enhanced,t_tx_raw,"
    "t_enhance,t_total,quality,utility,feasible";
inline constexpr const char* kCapacitySweepHeader =
    "ratio,policy,mean_utility,mean_latency,feasible";
inline constexpr const char* kGammaSweepHeader =
    "gamma,mean_quality,mean_t_sr_edge,mean_t_enhance,mean_utility";

std::string report_csv(const ScenarioReport& report);
std::string capacity_sweep_csv(const std::vector<CapacitySweepRow>& rows);
std::string gamma_sweep_csv(const std::vector<GammaSweepRow>& rows);

// Shortest round-trip decimal form, used by every CSV writer.
std::string format_number(double value);

}  // namespace edgesr
