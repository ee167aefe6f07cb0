#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edgesr {

// One user task. Images are square, so a resolution is a side length in pixels.
struct Request {
    std::string id;
    int target_resolution = 0;
    double lambda = 0.0;
    std::uint64_t prompt_seed = 0;
    // Per-request latency ceiling in seconds; overrides the annealing default when set.
    std::optional<double> latency_budget;

    bool operator==(const Request&) const = default;
};

// Decision variables for one request: SR scale and number of denoising steps.
struct Configuration {
    int sr_scale = 1;
    int denoise_steps = 1;

    auto operator<=>(const Configuration&) const = default;
};

// Finite candidate lists for scale and steps. Both strictly increasing, non-empty.
class CandidateSets {
public:
    CandidateSets(std::vector<int> scales, std::vector<int> steps);

    // {1,2,4} x {10,20,30,40,50}
    static CandidateSets defaults();

    const std::vector<int>& scales() const noexcept { return scales_; }
    const std::vector<int>& steps() const noexcept { return steps_; }
    std::size_t size() const noexcept { return scales_.size() * steps_.size(); }

    bool contains(const Configuration& config) const noexcept;
    std::optional<std::size_t> scale_index(int scale) const noexcept;
    std::optional<std::size_t> step_index(int steps) const noexcept;

    bool operator==(const CandidateSets&) const = default;

private:
    std::vector<int> scales_;
    std::vector<int> steps_;
};

// Fraction of grid cells routed to the diffusion (edge) enhancement branch.
class AllocationRatio {
public:
    explicit AllocationRatio(double gamma);

    double value() const noexcept { return gamma_; }

    // round-half-up of gamma * grid_side^2
    int cell_count(int grid_side) const;

    bool operator==(const AllocationRatio&) const = default;

private:
    double gamma_;
};

Request validate_request(const Request& raw, const CandidateSets& sets, int grid_side);

// Scale-major, step-minor Cartesian product of the candidate lists.
std::vector<Configuration> configuration_grid(const CandidateSets& sets);

int initial_resolution(int target, int scale);

}  // namespace edgesr
