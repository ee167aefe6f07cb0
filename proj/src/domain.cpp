#include "edgesr/domain.hpp"

#include <algorithm>
#include <cmath>

#include "edgesr/error.hpp"

namespace edgesr {

namespace {

void check_strictly_increasing(const std::vector<int>& values, const char* what) {
    if (values.empty()) {
        fail(ErrorCode::InvalidArgument, std::string(what) + " candidate list is empty");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] <= 0) {
            fail(ErrorCode::InvalidArgument, std::string(what) + " candidates must be positive");
        }
        if (i > 0 && values[i] <= values[i - 1]) {
            fail(ErrorCode::InvalidArgument,
                 std::string(what) + " candidates must be strictly increasing");
        }
    }
}

std::optional<std::size_t> index_of(const std::vector<int>& values, int v) noexcept {
    auto it = std::lower_bound(values.begin(), values.end(), v);
    if (it == values.end() || *it != v) return std::nullopt;
    return static_cast<std::size_t>(it - values.begin());
}

}  // namespace

CandidateSets::CandidateSets(std::vector<int> scales, std::vector<int> steps)
    : scales_(std::move(scales)), steps_(std::move(steps)) {
    check_strictly_increasing(scales_, "scale");
    check_strictly_increasing(steps_, "step");
}

CandidateSets CandidateSets::defaults() {
    return CandidateSets({1, 2, 4}, {10, 20, 30, 40, 50});
}

bool CandidateSets::contains(const Configuration& config) const noexcept {
    return scale_index(config.sr_scale).has_value() && step_index(config.denoise_steps).has_value();
}

std::optional<std::size_t> CandidateSets::scale_index(int scale) const noexcept {
    return index_of(scales_, scale);
}

std::optional<std::size_t> CandidateSets::step_index(int steps) const noexcept {
    return index_of(steps_, steps);
}

AllocationRatio::AllocationRatio(double gamma) : gamma_(gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "allocation ratio must lie in [0, 1]");
    }
}

int AllocationRatio::cell_count(int grid_side) const {
    if (grid_side <= 0) fail(ErrorCode::InvalidArgument, "grid side must be positive");
    const int cells = grid_side * grid_side;
    return std::clamp(static_cast<int>(std::floor(gamma_ * cells + 0.5)), 0, cells);
}

Request validate_request(const Request& raw, const CandidateSets& sets, int grid_side) {
    if (!(raw.lambda >= 0.0 && raw.lambda <= 1.0)) {
        fail(ErrorCode::WeightOutOfRange,
             "request '" + raw.id + "': lambda must lie in [0, 1]");
    }
    if (grid_side <= 0) fail(ErrorCode::InvalidArgument, "grid side must be positive");
    if (raw.target_resolution <= 0) {
        fail(ErrorCode::IndivisibleResolution,
             "request '" + raw.id + "': target resolution must be positive");
    }
    for (int s : sets.scales()) {
        if (raw.target_resolution % (s * grid_side) != 0) {
            fail(ErrorCode::IndivisibleResolution,
                 "request '" + raw.id + "': target resolution " +
                     std::to_string(raw.target_resolution) + " is not divisible by scale " +
                     std::to_string(s) + " x grid " + std::to_string(grid_side));
        }
    }
    if (raw.latency_budget && !(*raw.latency_budget >= 0.0)) {
        fail(ErrorCode::InvalidArgument, "request '" + raw.id + "': negative latency budget");
    }
    return raw;
}

std::vector<Configuration> configuration_grid(const CandidateSets& sets) {
    std::vector<Configuration> grid;
    grid.reserve(sets.size());
    for (int s : sets.scales()) {
        for (int d : sets.steps()) grid.push_back({s, d});
    }
    return grid;
}

int initial_resolution(int target, int scale) {
    if (scale <= 0 || target <= 0 || target % scale != 0) {
        fail(ErrorCode::IndivisibleResolution,
             "target " + std::to_string(target) + " is not divisible by scale " +
                 std::to_string(scale));
    }
    return target / scale;
}

}  // namespace edgesr
