#include "doctest.h"

#include <cmath>
#include <map>

#include "edgesr/error.hpp"
#include "edgesr/optimizer.hpp"
#include "edgesr/rng.hpp"

using namespace edgesr;

namespace {

Request req(int target, double lambda, const std::string& id = "r") {
    Request r;
    r.id = id;
    r.target_resolution = target;
    r.lambda = lambda;
    return r;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an edgesr::Error");
    return ErrorCode::IoError;
}

// Independent exhaustive search: first strict maximum in grid order.
Configuration oracle_argmax(const Request& r, const AllocationRatio& g, const SystemProfile& p,
                            const CandidateSets& sets, double quality_offset = 0.0) {
    Configuration best{};
    double best_u = -INFINITY;
    for (int s : sets.scales()) {
        for (int d : sets.steps()) {
            const Configuration c{s, d};
            const double q = quality_final(r, c, g, p) + quality_offset;
            const double u = q - r.lambda * latency_total(r, c, g, p).total;
            if (u > best_u) {
                best_u = u;
                best = c;
            }
        }
    }
    return best;
}

}  // namespace

TEST_CASE("utility") {
    CHECK(utility(1.0, 100.0, 0.0) == 1.0);
    CHECK(utility(0.8, 1.0, 0.5) == doctest::Approx(0.3));
}

TEST_CASE("argmax is invariant to a constant quality offset") {
    const auto p = default_profile();
    const auto sets = CandidateSets::defaults();
    for (int target : {768, 1024, 1536, 2048}) {
        for (double lambda : {0.0, 0.01, 0.05, 0.5}) {
            const Request r = req(target, lambda);
            CHECK(oracle_argmax(r, AllocationRatio(0.25), p, sets) ==
                  oracle_argmax(r, AllocationRatio(0.25), p, sets, 0.37));
        }
    }
}

TEST_CASE("neighbor on a 1-D line is a fair coin") {
    const CandidateSets sets({1, 2, 4}, {10});
    Rng rng(99);
    int down = 0, up = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto c = neighbor({2, 10}, sets, rng);
        if (c == Configuration{1, 10}) ++down;
        else if (c == Configuration{4, 10}) ++up;
        else FAIL("unexpected neighbor");
    }
    const double e = n / 2.0;
    const double chi2 = (down - e) * (down - e) / e + (up - e) * (up - e) / e;
    CHECK(chi2 < 6.635);  // 1 dof, 1% level
}

TEST_CASE("neighbor in the grid interior picks each of four moves uniformly") {
    const auto sets = CandidateSets::defaults();
    Rng rng(5);
    std::map<std::pair<int, int>, int> counts;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const auto c = neighbor({2, 30}, sets, rng);
        ++counts[{c.sr_scale, c.denoise_steps}];
    }
    REQUIRE(counts.size() == 4);
    CHECK(counts.count({1, 30}));
    CHECK(counts.count({4, 30}));
    CHECK(counts.count({2, 20}));
    CHECK(counts.count({2, 40}));
    double chi2 = 0;
    for (const auto& [_, k] : counts) chi2 += (k - n / 4.0) * (k - n / 4.0) / (n / 4.0);
    CHECK(chi2 < 11.345);  // 3 dof, 1% level
}

TEST_CASE("neighbor closure and degenerate grids") {
    Rng rng(1);
    const CandidateSets single({2}, {30});
    CHECK(neighbor({2, 30}, single, rng) == Configuration{2, 30});

    const auto sets = CandidateSets::defaults();
    for (const auto& start : configuration_grid(sets)) {
        for (int i = 0; i < 50; ++i) {
            const auto c = neighbor(start, sets, rng);
            CHECK(sets.contains(c));
            const int changed = (c.sr_scale != start.sr_scale) + (c.denoise_steps != start.denoise_steps);
            CHECK(changed == 1);
            const auto si = static_cast<long>(*sets.scale_index(c.sr_scale)) -
                            static_cast<long>(*sets.scale_index(start.sr_scale));
            const auto di = static_cast<long>(*sets.step_index(c.denoise_steps)) -
                            static_cast<long>(*sets.step_index(start.denoise_steps));
            CHECK(std::abs(si) + std::abs(di) == 1);
        }
    }
    CHECK(code_of([&] { neighbor({3, 10}, sets, rng); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("metropolis acceptance frequency matches exp(delta/T)") {
    Rng rng(2024);
    for (double temp : {0.1, 1.0}) {
        const double delta = -0.05;
        const int n = 100000;
        int accepted = 0;
        for (int i = 0; i < n; ++i) accepted += metropolis_accept(delta, temp, rng);
        const double expected = std::exp(delta / temp);
        CHECK(std::abs(accepted / double(n) - expected) <= 0.02 * expected);
    }
    for (int i = 0; i < 1000; ++i) CHECK(metropolis_accept(1e-9, 0.01, rng));
    for (int i = 0; i < 1000; ++i) CHECK(metropolis_accept(0.0, 0.01, rng));
}

TEST_CASE("annealing schedule length") {
    SAParams p;
    CHECK(p.outer_iterations() == 66);
    CHECK(p.outer_iterations() ==
          static_cast<int>(std::ceil(std::log(p.min_temperature / p.initial_temperature) /
                                     std::log(p.cooling))));
    const auto r = anneal(req(1024, 0.02), AllocationRatio(0.25), default_profile(),
                          CandidateSets::defaults(), p);
    CHECK(r.trace.moves.size() == 66u * 20u);
    CHECK(r.trace.best_utility.size() == 66u);
    double prev_temp = INFINITY;
    for (std::size_t i = 0; i < r.trace.moves.size(); i += 20) {
        CHECK(r.trace.moves[i].temperature < prev_temp);
        prev_temp = r.trace.moves[i].temperature;
    }
    for (std::size_t i = 1; i < r.trace.best_utility.size(); ++i) {
        CHECK(r.trace.best_utility[i] >= r.trace.best_utility[i - 1]);
    }
}

TEST_CASE("anneal returns the best accepted configuration") {
    const Request r = req(1536, 0.02);
    const auto g = AllocationRatio(0.25);
    const auto prof = default_profile();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SAParams p;
        p.rng_seed = seed;
        const auto res = anneal(r, g, prof, CandidateSets::defaults(), p);
        CHECK(res.utility == evaluate_utility(r, res.config, g, prof));
        int accepted = 0, rejected = 0;
        for (const auto& m : res.trace.moves) {
            if (m.accepted()) {
                ++accepted;
                CHECK(*m.utility <= res.utility);
            }
            if (m.outcome == MoveOutcome::RejectedMetropolis) ++rejected;
        }
        CHECK(accepted == res.trace.accepted);
        CHECK(rejected == res.trace.rejected);
    }
}

TEST_CASE("anneal is deterministic for a fixed seed") {
    SAParams p;
    p.rng_seed = 77;
    const auto a = anneal(req(2048, 0.05), AllocationRatio(0.25), default_profile(),
                          CandidateSets::defaults(), p);
    const auto b = anneal(req(2048, 0.05), AllocationRatio(0.25), default_profile(),
                          CandidateSets::defaults(), p);
    CHECK(a.config == b.config);
    CHECK(a.utility == b.utility);
    REQUIRE(a.trace.moves.size() == b.trace.moves.size());
    for (std::size_t i = 0; i < a.trace.moves.size(); ++i) {
        CHECK(a.trace.moves[i].candidate == b.trace.moves[i].candidate);
        CHECK(a.trace.moves[i].outcome == b.trace.moves[i].outcome);
    }
}

TEST_CASE("anneal on degenerate grids and budgets") {
    const auto prof = default_profile();
    const CandidateSets single({2}, {30});
    const auto r = anneal(req(1024, 0.02), AllocationRatio(0.25), prof, single, SAParams{});
    CHECK(r.config == Configuration{2, 30});
    CHECK(r.trace.rejected_budget == 0);

    SAParams zero;
    zero.latency_budget = 0.0;
    CHECK(code_of([&] {
              anneal(req(1024, 0.02), AllocationRatio(0.25), prof, CandidateSets::defaults(), zero);
          }) == ErrorCode::NoFeasibleConfiguration);
}

TEST_CASE("anneal never returns a configuration over budget") {
    const auto prof = default_profile();
    const auto g = AllocationRatio(0.25);
    for (double budget : {14.5, 16.0, 20.0}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            SAParams p;
            p.rng_seed = seed;
            p.latency_budget = budget;
            const Request r = req(2048, 0.01);
            const auto res = anneal(r, g, prof, CandidateSets::defaults(), p);
            CHECK(latency_total(r, res.config, g, prof).total <= budget);
            for (const auto& m : res.trace.moves) {
                if (m.accepted()) CHECK(latency_total(r, m.candidate, g, prof).total <= budget);
            }
        }
    }
}

TEST_CASE("request budget overrides the annealing default") {
    Request r = req(1024, 0.02);
    r.latency_budget = 0.0;
    CHECK(code_of([&] {
              brute_force(r, AllocationRatio(0.25), default_profile(), CandidateSets::defaults(), 1e9);
          }) == ErrorCode::NoFeasibleConfiguration);
}

TEST_CASE("anneal matches the exhaustive optimum on the reduced grid") {
    const CandidateSets sets({1, 2, 4}, {10, 20, 30, 40});
    const auto prof = default_profile();
    const auto g = AllocationRatio(0.25);
    const Request r = req(1024, 0.02);
    const auto best = brute_force(r, g, prof, sets, std::nullopt);
    const double best_u = evaluate_utility(r, best, g, prof);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SAParams p;
        p.rng_seed = seed;
        const auto res = anneal(r, g, prof, sets, p);
        CHECK(res.utility <= best_u);
        if (best_u - res.utility <= 0.01 * std::abs(best_u)) ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("brute force agrees with an independent exhaustive oracle") {
    const auto prof = default_profile();
    const auto sets = CandidateSets::defaults();
    for (int target : {768, 1024, 1536, 2048}) {
        for (double lambda : {0.0, 0.001, 0.01, 0.02, 0.05, 0.2}) {
            for (double gamma : {0.0, 0.25, 0.5, 1.0}) {
                const Request r = req(target, lambda);
                CHECK(brute_force(r, AllocationRatio(gamma), prof, sets, std::nullopt) ==
                      oracle_argmax(r, AllocationRatio(gamma), prof, sets));
            }
        }
    }
}

TEST_CASE("brute force tie-break is lexicographic") {
    // Latency-indifferent user and a saturated multiplier: every configuration
    // whose capped quality reaches 1 ties.
    SystemProfile p = default_profile();
    p.enhance_max_ratio = 10;
    const Request r = req(1536, 0.0);
    const auto c = brute_force(r, AllocationRatio(1), p, CandidateSets::defaults(), std::nullopt);
    CHECK(quality_final(r, c, AllocationRatio(1), p) == 1.0);
    for (const auto& other : configuration_grid(CandidateSets::defaults())) {
        if (other == c) break;
        CHECK(quality_final(r, other, AllocationRatio(1), p) < 1.0);
    }
}

TEST_CASE("brute force finds a constructed unique optimum") {
    // Sharp resolution peak at 512 px and fast step saturation: (2, 10) on a
    // 1024 target beats everything once latency matters.
    SystemProfile p = default_profile();
    p.quality_peak_resolution = 512;
    p.quality_res_width = 0.05;
    p.quality_step_rate = 5;
    const Request r = req(1024, 0.01);
    CHECK(brute_force(r, AllocationRatio(0.25), p, CandidateSets::defaults(), std::nullopt) ==
          Configuration{2, 10});
    const auto grid = configuration_grid(CandidateSets::defaults());
    const double top = evaluate_utility(r, {2, 10}, AllocationRatio(0.25), p);
    for (const auto& c : grid) {
        if (c != Configuration{2, 10}) CHECK(evaluate_utility(r, c, AllocationRatio(0.25), p) < top);
    }
}

TEST_CASE("brute force upper-bounds anneal") {
    const auto prof = default_profile();
    const auto g = AllocationRatio(0.25);
    for (int target : {768, 1024, 1536, 2048}) {
        const Request r = req(target, 0.02);
        const double best = evaluate_utility(r, brute_force(r, g, prof, CandidateSets::defaults(), std::nullopt), g, prof);
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            SAParams p;
            p.rng_seed = seed;
            CHECK(anneal(r, g, prof, CandidateSets::defaults(), p).utility <= best);
        }
    }
}

TEST_CASE("feasibility report") {
    const auto prof = default_profile();
    const auto g = AllocationRatio(0.25);
    const auto empty = check_feasibility({}, {}, g, prof, {1.0, 1.0});
    CHECK(empty.feasible());
    CHECK(empty.edge_load == 0.0);
    CHECK(empty.device_load == 0.0);

    const std::vector<Request> one{req(2048, 0.02)};
    const auto tight = check_feasibility({Configuration{4, 30}}, one, g, prof, {1.0, 1e12});
    CHECK_FALSE(tight.edge_ok);
    CHECK(tight.device_ok);
    CHECK(tight.edge_load == doctest::Approx(load_gen(30, 512, prof) + load_sr_edge(512, g, prof)));

    std::vector<Request> reqs;
    std::vector<std::optional<Configuration>> configs;
    for (int k = 0; k < 6; ++k) {
        reqs.push_back(req(1024, 0.02, "u" + std::to_string(k)));
        configs.emplace_back(Configuration{2, 20});
    }
    const auto all = check_feasibility(configs, reqs, g, prof, CapacityLimits::from_profile(prof, 300));
    REQUIRE(all.feasible());
    while (!reqs.empty()) {
        reqs.pop_back();
        configs.pop_back();
        CHECK(check_feasibility(configs, reqs, g, prof, CapacityLimits::from_profile(prof, 300)).feasible());
    }
}

TEST_CASE("policy names round trip") {
    for (Policy p : {Policy::SimulatedAnnealing, Policy::BruteForce, Policy::Random, Policy::NoSR,
                     Policy::OneType}) {
        CHECK(parse_policy(to_string(p)) == p);
    }
    CHECK(code_of([] { parse_policy("greedy"); }) == ErrorCode::ParseError);
}

TEST_CASE("schedule with one request reduces to the single-request search") {
    const auto prof = default_profile();
    const auto g = AllocationRatio(0.25);
    SAParams p;
    p.rng_seed = 9;
    const std::vector<Request> one{req(1536, 0.02)};
    const auto sa = schedule(one, g, prof, CandidateSets::defaults(), p, Policy::SimulatedAnnealing,
                             CapacityLimits::unbounded());
    SAParams derived = p;
    derived.rng_seed = Rng::derive(p.rng_seed, 0);
    const auto direct = anneal(one[0], g, prof, CandidateSets::defaults(), derived);
    CHECK(*sa.tasks[0].config == direct.config);
    CHECK(sa.aggregate_utility == direct.utility);

    const auto bf = schedule(one, g, prof, CandidateSets::defaults(), p, Policy::BruteForce,
                             CapacityLimits::unbounded());
    CHECK(*bf.tasks[0].config == brute_force(one[0], g, prof, CandidateSets::defaults(), std::nullopt));
}

TEST_CASE("baseline policies fix the scale") {
    const auto prof = default_profile();
    const auto g = AllocationRatio(0.25);
    std::vector<Request> reqs;
    for (int k = 0; k < 8; ++k) reqs.push_back(req(768 + 256 * (k % 4), 0.02, "u" + std::to_string(k)));
    const auto limits = CapacityLimits::unbounded();
    const auto nosr = schedule(reqs, g, prof, CandidateSets::defaults(), SAParams{}, Policy::NoSR, limits);
    const auto one = schedule(reqs, g, prof, CandidateSets::defaults(), SAParams{}, Policy::OneType, limits);
    for (std::size_t k = 0; k < reqs.size(); ++k) {
        CHECK(nosr.tasks[k].config->sr_scale == 1);
        CHECK(one.tasks[k].config->sr_scale == 2);
        CHECK(*nosr.tasks[k].config ==
              brute_force(reqs[k], g, prof, CandidateSets({1}, CandidateSets::defaults().steps()), std::nullopt));
    }
}

TEST_CASE("NoSR fails a 2K request under a tight budget while SA succeeds via scale 4") {
    const auto prof = default_profile();
    const auto g = AllocationRatio(0.25);
    Request r = req(2048, 0.02);
    const double fastest_nosr = latency_total(r, {1, 10}, g, prof).total;
    const double fastest_s4 = latency_total(r, {4, 10}, g, prof).total;
    REQUIRE(fastest_s4 < fastest_nosr);
    SAParams p;
    p.latency_budget = 0.5 * (fastest_nosr + fastest_s4);
    const std::vector<Request> reqs{r};
    const auto nosr = schedule(reqs, g, prof, CandidateSets::defaults(), p, Policy::NoSR,
                               CapacityLimits::unbounded());
    CHECK_FALSE(nosr.tasks[0].config.has_value());
    CHECK(nosr.tasks[0].error.has_value());
    CHECK(nosr.all_failed());
    const auto sa = schedule(reqs, g, prof, CandidateSets::defaults(), p, Policy::SimulatedAnnealing,
                             CapacityLimits::unbounded());
    REQUIRE(sa.tasks[0].config.has_value());
    CHECK(sa.tasks[0].config->sr_scale == 4);
}

TEST_CASE("schedules respect residual capacity and keep utility additive") {
    const auto prof = default_profile();
    const auto g = AllocationRatio(0.25);
    std::vector<Request> reqs;
    const int targets[] = {768, 1024, 1536, 2048};
    for (int k = 0; k < 10; ++k) reqs.push_back(req(targets[k % 4], 0.02, "u" + std::to_string(k)));
    for (double round : {20.0, 60.0, 300.0}) {
        const auto limits = CapacityLimits::from_profile(prof, round);
        for (Policy pol : {Policy::SimulatedAnnealing, Policy::BruteForce, Policy::Random,
                           Policy::NoSR, Policy::OneType}) {
            const auto s = schedule(reqs, g, prof, CandidateSets::defaults(), SAParams{}, pol, limits);
            CHECK(s.feasibility.feasible());
            double sum = 0;
            for (const auto& t : s.tasks) {
                sum += t.utility;
                CHECK(t.config.has_value() != t.error.has_value());
                if (!t.config) CHECK(t.utility == 0.0);
            }
            CHECK(sum == s.aggregate_utility);
            const auto again = schedule(reqs, g, prof, CandidateSets::defaults(), SAParams{}, pol, limits);
            CHECK(again.aggregate_utility == s.aggregate_utility);
        }
    }
}
