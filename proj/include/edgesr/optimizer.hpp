#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgesr/domain.hpp"
#include "edgesr/perf_models.hpp"
#include "edgesr/rng.hpp"

namespace edgesr {

struct SAParams {
    double initial_temperature = 1.0;
    double min_temperature = 1e-3;
    double cooling = 0.9;
    int iters_per_temp = 20;
    std::optional<double> latency_budget;  // unbounded when empty
    std::uint64_t rng_seed = 42;

    void validate() const;
    // Number of temperature levels visited: ceil(log(Tmin/T) / log(cooling)).
    int outer_iterations() const;
};

// U = Q - lambda * T
double utility(double quality, double latency, double lambda);

double evaluate_utility(const Request& request, const Configuration& config,
                        const AllocationRatio& gamma, const SystemProfile& profile);

// Moves one coordinate by one index. Returns `config` only if no move exists.
Configuration neighbor(const Configuration& config, const CandidateSets& sets, Rng& rng);

// Metropolis rule: always accept improvements, otherwise accept with exp(delta/T).
bool metropolis_accept(double delta_utility, double temperature, Rng& rng);

enum class MoveOutcome {
    AcceptedBetter,
    AcceptedMetropolis,
    RejectedMetropolis,
    RejectedBudget,
    RejectedCapacity,
    NoMove,
};

std::string_view to_string(MoveOutcome outcome) noexcept;

struct MoveRecord {
    double temperature = 0;
    int iteration = 0;
    Configuration candidate;
    std::optional<double> utility;  // absent when the candidate was not evaluated
    MoveOutcome outcome = MoveOutcome::NoMove;

    bool accepted() const noexcept {
        return outcome == MoveOutcome::AcceptedBetter ||
               outcome == MoveOutcome::AcceptedMetropolis;
    }
};

struct AnnealTrace {
    std::vector<MoveRecord> moves;
    std::vector<double> best_utility;  // best so far after each temperature level
    int accepted = 0;
    int rejected = 0;  // Metropolis rejections
    int rejected_budget = 0;
    int rejected_capacity = 0;
};

struct AnnealResult {
    Configuration config;
    double utility = 0;
    AnnealTrace trace;
};

// Extra admissibility test layered over the latency budget (e.g. residual capacity).
using Admissible = std::function<bool(const Configuration&)>;

AnnealResult anneal(const Request& request, const AllocationRatio& gamma,
                    const SystemProfile& profile, const CandidateSets& sets,
                    const SAParams& params, const Admissible& admissible = {});

// Exhaustive argmax over the grid; ties go to the lowest (scale, step) index.
Configuration brute_force(const Request& request, const AllocationRatio& gamma,
                          const SystemProfile& profile, const CandidateSets& sets,
                          std::optional<double> latency_budget,
                          const Admissible& admissible = {});

// Per-round load budgets for the edge server and user devices, in GFLOP.
struct CapacityLimits {
    double edge = 0;
    double device = 0;

    // capacity x round length
    static CapacityLimits from_profile(const SystemProfile& profile, double round_seconds);
    static CapacityLimits unbounded();
};

struct FeasibilityReport {
    double edge_load = 0;
    double device_load = 0;
    double edge_limit = 0;
    double device_limit = 0;
    bool edge_ok = true;
    bool device_ok = true;

    bool feasible() const noexcept { return edge_ok && device_ok; }
};

// Unscheduled requests (empty optional) contribute no load.
FeasibilityReport check_feasibility(const std::vector<std::optional<Configuration>>& configs,
                                    const std::vector<Request>& requests,
                                    const AllocationRatio& gamma, const SystemProfile& profile,
                                    const CapacityLimits& limits);

enum class Policy { SimulatedAnnealing, BruteForce, Random, NoSR, OneType };

std::string_view to_string(Policy policy) noexcept;
Policy parse_policy(std::string_view name);

struct ScheduledTask {
    std::string request_id;
    std::optional<Configuration> config;  // empty when no feasible configuration fit
    double utility = 0;                   // 0 for unscheduled requests
    std::optional<std::string> error;
    AnnealTrace trace;                    // only filled by the annealing policy
};

struct ScheduleResult {
    Policy policy = Policy::SimulatedAnnealing;
    std::vector<ScheduledTask> tasks;
    double aggregate_utility = 0;
    FeasibilityReport feasibility;

    bool all_failed() const noexcept;
};

// Greedy sequential allocation in arrival order with residual-capacity accounting.
ScheduleResult schedule(const std::vector<Request>& requests, const AllocationRatio& gamma,
                        const SystemProfile& profile, const CandidateSets& sets,
                        const SAParams& params, Policy policy, const CapacityLimits& limits);

}  // namespace edgesr
