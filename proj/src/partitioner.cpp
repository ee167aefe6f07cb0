#include "edgesr/partitioner.hpp"

#include <algorithm>
#include <numeric>

#include "edgesr/error.hpp"

namespace edgesr {

std::vector<Rect> grid_cells(int width, int height, int grid_side) {
    if (grid_side <= 0) fail(ErrorCode::InvalidArgument, "grid side must be positive");
    if (width % grid_side != 0 || height % grid_side != 0) {
        fail(ErrorCode::IndivisibleResolution,
             std::to_string(width) + "x" + std::to_string(height) +
                 " image is not divisible by grid " + std::to_string(grid_side));
    }
    const int cw = width / grid_side;
    const int ch = height / grid_side;
    std::vector<Rect> cells;
    cells.reserve(static_cast<std::size_t>(grid_side * grid_side));
    for (int r = 0; r < grid_side; ++r) {
        for (int c = 0; c < grid_side; ++c) cells.push_back({c * cw, r * ch, cw, ch});
    }
    return cells;
}

std::vector<PatchView> grid_partition(const Image& image, int grid_side) {
    std::vector<PatchView> views;
    for (const Rect& r : grid_cells(image.width, image.height, grid_side)) {
        views.emplace_back(image, r);
    }
    return views;
}

double patch_variance(const PatchView& patch) {
    // Welford's running mean and sum of squared deviations.
    double mean = 0.0;
    double m2 = 0.0;
    long n = 0;
    const Rect& r = patch.rect();
    for (int y = 0; y < r.height; ++y) {
        for (int x = 0; x < r.width; ++x) {
            for (int c = 0; c < patch.channels(); ++c) {
                const double v = patch.at(x, y, c);
                ++n;
                const double d = v - mean;
                mean += d / static_cast<double>(n);
                m2 += d * (v - mean);
            }
        }
    }
    return n > 0 ? std::max(0.0, m2 / static_cast<double>(n)) : 0.0;
}

bool PartitionResult::is_foreground(int cell) const {
    return std::binary_search(foreground.begin(), foreground.end(), cell);
}

PartitionResult select_foreground(const Image& image, int grid_side,
                                  const AllocationRatio& gamma) {
    const auto patches = grid_partition(image, grid_side);
    PartitionResult result;
    result.grid_side = grid_side;
    result.image_width = image.width;
    result.image_height = image.height;
    result.gamma = gamma.value();
    result.variances.reserve(patches.size());
    for (const auto& p : patches) result.variances.push_back(patch_variance(p));

    std::vector<int> order(patches.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return result.variances[static_cast<std::size_t>(a)] >
               result.variances[static_cast<std::size_t>(b)];
    });
    const auto count = static_cast<std::size_t>(gamma.cell_count(grid_side));
    result.foreground.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
    result.background.assign(order.begin() + static_cast<std::ptrdiff_t>(count), order.end());
    std::sort(result.foreground.begin(), result.foreground.end());
    std::sort(result.background.begin(), result.background.end());
    return result;
}

Image foreground_mask(const PartitionResult& result) {
    Image mask(result.image_width, result.image_height, 1, 0.0);
    const auto cells = grid_cells(result.image_width, result.image_height, result.grid_side);
    for (int idx : result.foreground) {
        const Rect& r = cells[static_cast<std::size_t>(idx)];
        for (int y = r.y; y < r.y + r.height; ++y) {
            for (int x = r.x; x < r.x + r.width; ++x) mask.at(x, y) = 1.0;
        }
    }
    return mask;
}

double mask_iou(const PartitionResult& result, const Image& reference, double threshold) {
    if (reference.channels != 1) {
        fail(ErrorCode::DimensionMismatch, "reference mask must be single-channel");
    }
    if (reference.width != result.image_width || reference.height != result.image_height) {
        fail(ErrorCode::DimensionMismatch, "reference mask size differs from the partitioned image");
    }
    const Image mask = foreground_mask(result);
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < mask.pixels.size(); ++i) {
        const bool a = mask.pixels[i] > 0.5;
        const bool b = reference.pixels[i] >= threshold;
        inter += (a && b) ? 1 : 0;
        uni += (a || b) ? 1 : 0;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace edgesr
