#pragma once

#include <vector>

#include "edgesr/domain.hpp"
#include "edgesr/image.hpp"

namespace edgesr {

// Non-owning view of one grid cell. The image must outlive the view.
class PatchView {
public:
    PatchView(const Image& image, Rect rect) : image_(&image), rect_(rect) {}

    const Rect& rect() const noexcept { return rect_; }
    int channels() const noexcept { return image_->channels; }
    // Coordinates are local to the patch.
    double at(int x, int y, int c = 0) const noexcept {
        return image_->at(rect_.x + x, rect_.y + y, c);
    }

private:
    const Image* image_;
    Rect rect_;
};

// Cell rectangles for a grid_side x grid_side grid, row-major.
std::vector<Rect> grid_cells(int width, int height, int grid_side);

std::vector<PatchView> grid_partition(const Image& image, int grid_side);

// Population variance pooled over every pixel and channel of the patch.
double patch_variance(const PatchView& patch);

struct PartitionResult {
    int grid_side = 0;
    int image_width = 0;
    int image_height = 0;
    std::vector<double> variances;  // row-major per cell
    std::vector<int> foreground;    // ascending cell indices
    std::vector<int> background;    // ascending cell indices
    double gamma = 0;

    bool is_foreground(int cell) const;
};

// The round(gamma * cells) highest-variance cells; equal variances go to the lower index.
PartitionResult select_foreground(const Image& image, int grid_side, const AllocationRatio& gamma);

// Single-channel mask, 1 on foreground cells.
Image foreground_mask(const PartitionResult& result);

// IoU between the rasterised foreground and `reference` binarised at `threshold`.
double mask_iou(const PartitionResult& result, const Image& reference, double threshold = 0.5);

}  // namespace edgesr
