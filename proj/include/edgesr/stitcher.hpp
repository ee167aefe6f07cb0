#pragma once

#include <vector>

#include "edgesr/domain.hpp"
#include "edgesr/image.hpp"
#include "edgesr/partitioner.hpp"

namespace edgesr {

// Which sides of a patch overlap a neighbour.
struct EdgeFlags {
    bool left = false;
    bool right = false;
    bool top = false;
    bool bottom = false;

    bool operator==(const EdgeFlags&) const = default;
};

// Single-channel weights, same size as the patch they belong to.
struct WeightWindow {
    int width = 0;
    int height = 0;
    std::vector<double> weights;

    double at(int x, int y) const noexcept {
        return weights[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                       static_cast<std::size_t>(x)];
    }
};

struct Placement {
    Image patch;
    int x = 0;
    int y = 0;
    WeightWindow window;
    int cell = 0;       // grid cell the patch was cut from
    EdgeFlags edges;
};

// Linear feather for a patch whose flagged sides share a `band`-pixel strip with
// a neighbour. The outermost pixel of a band weighs 1/(band+1), rising by
// 1/(band+1) per pixel inwards, so complementary neighbours sum to one. When
// two bands of one patch meet, the weights telescope (rise + fall - 1).
WeightWindow feather_window(int patch_w, int patch_h, int band, const EdgeFlags& edges);

// Grid cells expanded by `overlap` pixels on every side with a neighbour.
// Adjacent patches therefore share a 2*overlap band.
std::vector<Placement> extract_overlapping(const Image& image, int grid_side, int overlap);

// Weighted overlap-add, normalised per pixel and clamped to [0, 1].
Image stitch(const std::vector<Placement>& placements, int canvas_w, int canvas_h);

enum class UpscaleMode { Nearest, Bilinear };

Image upscale(const Image& image, int scale, UpscaleMode mode);

// Upscales `rect` of `image`, resampling with a one-pixel context ring taken
// from the surrounding image so patch edges match a whole-image upscale.
Image upscale_region(const Image& image, const Rect& rect, int scale, UpscaleMode mode);

struct EnhanceResult {
    Image image;
    PartitionResult partition;
};

// Variance split, then bilinear on foreground patches and nearest on background
// patches, feather-stitched at scale x the source size.
EnhanceResult hybrid_enhance(const Image& image, int grid_side, const AllocationRatio& gamma,
                             int scale, int overlap);

}  // namespace edgesr
