#include "edgesr/optimizer.hpp"

#include <cmath>
#include <limits>

#include "edgesr/error.hpp"

namespace edgesr {

namespace {

std::optional<double> effective_budget(const Request& request, std::optional<double> fallback) {
    return request.latency_budget ? request.latency_budget : fallback;
}

bool within_budget(const Request& request, const Configuration& config,
                   const AllocationRatio& gamma, const SystemProfile& profile,
                   std::optional<double> budget) {
    if (!budget) return true;
    return latency_total(request, config, gamma, profile).total <= *budget;
}

[[noreturn]] void no_feasible(const Request& request) {
    fail(ErrorCode::NoFeasibleConfiguration,
         "request '" + request.id + "': no configuration satisfies the latency budget and "
         "capacity limits");
}

// Loads charged against the round budgets by one request.
struct Loads {
    double edge = 0;
    double device = 0;
};

Loads loads_of(const Request& request, const Configuration& config,
               const AllocationRatio& gamma, const SystemProfile& profile) {
    const int r = initial_resolution(request.target_resolution, config.sr_scale);
    return {load_gen(config.denoise_steps, r, profile) + load_sr_edge(r, gamma, profile),
            load_sr_device(r, gamma, profile)};
}

}  // namespace

void SAParams::validate() const {
    if (!(initial_temperature > 0.0) || !(min_temperature > 0.0)) {
        fail(ErrorCode::InvalidArgument, "annealing temperatures must be > 0");
    }
    if (!(min_temperature < initial_temperature)) {
        fail(ErrorCode::InvalidArgument, "min_temperature must be below initial_temperature");
    }
    if (!(cooling > 0.0 && cooling < 1.0)) {
        fail(ErrorCode::InvalidArgument, "cooling must lie in (0, 1)");
    }
    if (iters_per_temp <= 0) fail(ErrorCode::InvalidArgument, "iters_per_temp must be positive");
    if (latency_budget && !(*latency_budget >= 0.0)) {
        fail(ErrorCode::InvalidArgument, "latency_budget must be >= 0");
    }
}

int SAParams::outer_iterations() const {
    int n = 0;
    for (double t = initial_temperature; t > min_temperature; t *= cooling) ++n;
    return n;
}

double utility(double quality, double latency, double lambda) {
    return quality - lambda * latency;
}

double evaluate_utility(const Request& request, const Configuration& config,
                        const AllocationRatio& gamma, const SystemProfile& profile) {
    const double q = quality_final(request, config, gamma, profile);
    const double t = latency_total(request, config, gamma, profile).total;
    return utility(q, t, request.lambda);
}

Configuration neighbor(const Configuration& config, const CandidateSets& sets, Rng& rng) {
    const auto si = sets.scale_index(config.sr_scale);
    const auto di = sets.step_index(config.denoise_steps);
    if (!si || !di) fail(ErrorCode::InvalidArgument, "configuration is not in the candidate grid");

    struct Move {
        bool scale;
        int delta;
    };
    Move moves[4];
    int count = 0;
    if (*si > 0) moves[count++] = {true, -1};
    if (*si + 1 < sets.scales().size()) moves[count++] = {true, +1};
    if (*di > 0) moves[count++] = {false, -1};
    if (*di + 1 < sets.steps().size()) moves[count++] = {false, +1};
    if (count == 0) return config;

    const Move m = moves[rng.index(static_cast<std::uint64_t>(count))];
    Configuration next = config;
    if (m.scale) {
        next.sr_scale = sets.scales()[static_cast<std::size_t>(static_cast<long>(*si) + m.delta)];
    } else {
        next.denoise_steps =
            sets.steps()[static_cast<std::size_t>(static_cast<long>(*di) + m.delta)];
    }
    return next;
}

bool metropolis_accept(double delta_utility, double temperature, Rng& rng) {
    if (delta_utility > 0.0) return true;
    return rng.uniform() < std::exp(delta_utility / temperature);
}

std::string_view to_string(MoveOutcome outcome) noexcept {
    switch (outcome) {
        case MoveOutcome::AcceptedBetter: return "improved";
        case MoveOutcome::AcceptedMetropolis: return "metropolis";
        case MoveOutcome::RejectedMetropolis: return "metropolis_reject";
        case MoveOutcome::RejectedBudget: return "over_budget";
        case MoveOutcome::RejectedCapacity: return "over_capacity";
        case MoveOutcome::NoMove: return "no_move";
    }
    return "unknown";
}

AnnealResult anneal(const Request& request, const AllocationRatio& gamma,
                    const SystemProfile& profile, const CandidateSets& sets,
                    const SAParams& params, const Admissible& admissible) {
    params.validate();
    const auto budget = effective_budget(request, params.latency_budget);
    auto feasible = [&](const Configuration& c) {
        return within_budget(request, c, gamma, profile, budget) && (!admissible || admissible(c));
    };

    std::vector<Configuration> start_pool;
    for (const auto& c : configuration_grid(sets)) {
        if (feasible(c)) start_pool.push_back(c);
    }
    if (start_pool.empty()) no_feasible(request);

    Rng rng(params.rng_seed);
    AnnealResult result;
    Configuration current = start_pool[rng.index(start_pool.size())];
    double current_u = evaluate_utility(request, current, gamma, profile);
    result.config = current;
    result.utility = current_u;

    auto& trace = result.trace;
    for (double temp = params.initial_temperature; temp > params.min_temperature;
         temp *= params.cooling) {
        for (int it = 1; it <= params.iters_per_temp; ++it) {
            MoveRecord rec;
            rec.temperature = temp;
            rec.iteration = it;
            rec.candidate = neighbor(current, sets, rng);
            if (rec.candidate == current) {
                rec.outcome = MoveOutcome::NoMove;
            } else if (!within_budget(request, rec.candidate, gamma, profile, budget)) {
                rec.outcome = MoveOutcome::RejectedBudget;
                ++trace.rejected_budget;
            } else if (admissible && !admissible(rec.candidate)) {
                rec.outcome = MoveOutcome::RejectedCapacity;
                ++trace.rejected_capacity;
            } else {
                const double u = evaluate_utility(request, rec.candidate, gamma, profile);
                rec.utility = u;
                const double delta = u - current_u;
                if (delta > 0.0) {
                    rec.outcome = MoveOutcome::AcceptedBetter;
                } else if (metropolis_accept(delta, temp, rng)) {
                    rec.outcome = MoveOutcome::AcceptedMetropolis;
                } else {
                    rec.outcome = MoveOutcome::RejectedMetropolis;
                    ++trace.rejected;
                }
                if (rec.accepted()) {
                    ++trace.accepted;
                    current = rec.candidate;
                    current_u = u;
                    if (current_u > result.utility) {
                        result.utility = current_u;
                        result.config = current;
                    }
                }
            }
            trace.moves.push_back(rec);
        }
        trace.best_utility.push_back(result.utility);
    }
    return result;
}

Configuration brute_force(const Request& request, const AllocationRatio& gamma,
                          const SystemProfile& profile, const CandidateSets& sets,
                          std::optional<double> latency_budget, const Admissible& admissible) {
    const auto budget = effective_budget(request, latency_budget);
    std::optional<Configuration> best;
    double best_u = -std::numeric_limits<double>::infinity();
    for (const auto& c : configuration_grid(sets)) {
        if (!within_budget(request, c, gamma, profile, budget)) continue;
        if (admissible && !admissible(c)) continue;
        const double u = evaluate_utility(request, c, gamma, profile);
        if (!best || u > best_u) {
            best = c;
            best_u = u;
        }
    }
    if (!best) no_feasible(request);
    return *best;
}

CapacityLimits CapacityLimits::from_profile(const SystemProfile& profile, double round_seconds) {
    if (!(round_seconds > 0.0)) fail(ErrorCode::InvalidArgument, "round length must be > 0");
    return {profile.edge_capacity * round_seconds, profile.device_capacity * round_seconds};
}

CapacityLimits CapacityLimits::unbounded() {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf};
}

FeasibilityReport check_feasibility(const std::vector<std::optional<Configuration>>& configs,
                                    const std::vector<Request>& requests,
                                    const AllocationRatio& gamma, const SystemProfile& profile,
                                    const CapacityLimits& limits) {
    if (configs.size() != requests.size()) {
        fail(ErrorCode::InvalidArgument, "one configuration slot per request is required");
    }
    FeasibilityReport report;
    report.edge_limit = limits.edge;
    report.device_limit = limits.device;
    for (std::size_t k = 0; k < requests.size(); ++k) {
        if (!configs[k]) continue;
        const Loads l = loads_of(requests[k], *configs[k], gamma, profile);
        report.edge_load += l.edge;
        report.device_load += l.device;
    }
    report.edge_ok = report.edge_load <= limits.edge;
    report.device_ok = report.device_load <= limits.device;
    return report;
}

std::string_view to_string(Policy policy) noexcept {
    switch (policy) {
        case Policy::SimulatedAnnealing: return "sa";
        case Policy::BruteForce: return "brute";
        case Policy::Random: return "random";
        case Policy::NoSR: return "nosr";
        case Policy::OneType: return "onetype";
    }
    return "unknown";
}

Policy parse_policy(std::string_view name) {
    for (Policy p : {Policy::SimulatedAnnealing, Policy::BruteForce, Policy::Random,
                     Policy::NoSR, Policy::OneType}) {
        if (name == to_string(p)) return p;
    }
    fail(ErrorCode::ParseError, "unknown policy '" + std::string(name) + "'");
}

bool ScheduleResult::all_failed() const noexcept {
    if (tasks.empty()) return false;
    for (const auto& t : tasks) {
        if (t.config) return false;
    }
    return true;
}

namespace {

// Best steps for a fixed scale; the baselines NoSR and OneType.
Configuration fixed_scale_search(const Request& request, int scale, const AllocationRatio& gamma,
                                 const SystemProfile& profile, const CandidateSets& sets,
                                 std::optional<double> budget, const Admissible& admissible) {
    if (request.target_resolution % scale != 0) no_feasible(request);
    const CandidateSets line({scale}, sets.steps());
    return brute_force(request, gamma, profile, line, budget, admissible);
}

Configuration random_pick(const Request& request, const AllocationRatio& gamma,
                          const SystemProfile& profile, const CandidateSets& sets,
                          std::optional<double> budget, const Admissible& admissible, Rng& rng) {
    const auto b = effective_budget(request, budget);
    std::vector<Configuration> pool;
    for (const auto& c : configuration_grid(sets)) {
        if (within_budget(request, c, gamma, profile, b) && admissible(c)) pool.push_back(c);
    }
    if (pool.empty()) no_feasible(request);
    return pool[rng.index(pool.size())];
}

}  // namespace

ScheduleResult schedule(const std::vector<Request>& requests, const AllocationRatio& gamma,
                        const SystemProfile& profile, const CandidateSets& sets,
                        const SAParams& params, Policy policy, const CapacityLimits& limits) {
    params.validate();
    ScheduleResult result;
    result.policy = policy;
    Loads used;
    std::vector<std::optional<Configuration>> chosen;

    for (std::size_t k = 0; k < requests.size(); ++k) {
        const Request& req = requests[k];
        const Admissible fits = [&](const Configuration& c) {
            const Loads l = loads_of(req, c, gamma, profile);
            return used.edge + l.edge <= limits.edge && used.device + l.device <= limits.device;
        };
        ScheduledTask task;
        task.request_id = req.id;
        const std::uint64_t seed = Rng::derive(params.rng_seed, k);
        try {
            Configuration c;
            switch (policy) {
                case Policy::SimulatedAnnealing: {
                    SAParams p = params;
                    p.rng_seed = seed;
                    auto r = anneal(req, gamma, profile, sets, p, fits);
                    c = r.config;
                    task.trace = std::move(r.trace);
                    break;
                }
                case Policy::BruteForce:
                    c = brute_force(req, gamma, profile, sets, params.latency_budget, fits);
                    break;
                case Policy::Random: {
                    Rng rng(seed);
                    c = random_pick(req, gamma, profile, sets, params.latency_budget, fits, rng);
                    break;
                }
                case Policy::NoSR:
                    c = fixed_scale_search(req, 1, gamma, profile, sets, params.latency_budget,
                                           fits);
                    break;
                case Policy::OneType:
                    c = fixed_scale_search(req, 2, gamma, profile, sets, params.latency_budget,
                                           fits);
                    break;
            }
            const Loads l = loads_of(req, c, gamma, profile);
            used.edge += l.edge;
            used.device += l.device;
            task.config = c;
            task.utility = evaluate_utility(req, c, gamma, profile);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoFeasibleConfiguration) throw;
            task.error = e.what();
        }
        chosen.push_back(task.config);
        result.aggregate_utility += task.utility;
        result.tasks.push_back(std::move(task));
    }
    result.feasibility = check_feasibility(chosen, requests, gamma, profile, limits);
    return result;
}

}  // namespace edgesr
