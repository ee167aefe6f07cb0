#include "edgesr/stitcher.hpp"

#include <algorithm>
#include <cmath>

#include "edgesr/error.hpp"

namespace edgesr {

namespace {

// 1-D feather profile along one axis of length n.
std::vector<double> feather_profile(int n, int band, bool low_side, bool high_side) {
    std::vector<double> w(static_cast<std::size_t>(n));
    const double denom = band + 1.0;
    for (int i = 0; i < n; ++i) {
        const double rise = (low_side && band > 0) ? std::min(1.0, (i + 1) / denom) : 1.0;
        const double fall = (high_side && band > 0) ? std::min(1.0, (n - i) / denom) : 1.0;
        w[static_cast<std::size_t>(i)] = rise + fall - 1.0;
    }
    return w;
}

}  // namespace

WeightWindow feather_window(int patch_w, int patch_h, int band, const EdgeFlags& edges) {
    if (patch_w <= 0 || patch_h <= 0) fail(ErrorCode::InvalidArgument, "empty feather window");
    if (band < 0) fail(ErrorCode::InvalidArgument, "negative feather band");
    const auto wx = feather_profile(patch_w, band, edges.left, edges.right);
    const auto wy = feather_profile(patch_h, band, edges.top, edges.bottom);
    WeightWindow win;
    win.width = patch_w;
    win.height = patch_h;
    win.weights.resize(static_cast<std::size_t>(patch_w) * static_cast<std::size_t>(patch_h));
    for (int y = 0; y < patch_h; ++y) {
        for (int x = 0; x < patch_w; ++x) {
            win.weights[static_cast<std::size_t>(y) * static_cast<std::size_t>(patch_w) +
                        static_cast<std::size_t>(x)] =
                wx[static_cast<std::size_t>(x)] * wy[static_cast<std::size_t>(y)];
        }
    }
    return win;
}

namespace {

struct OverlapGeometry {
    Rect rect;
    EdgeFlags edges;
};

std::vector<OverlapGeometry> overlap_geometry(int width, int height, int grid_side, int overlap) {
    const auto cells = grid_cells(width, height, grid_side);
    if (overlap < 0) fail(ErrorCode::InvalidArgument, "overlap must be non-negative");
    const int cw = width / grid_side;
    const int ch = height / grid_side;
    if (overlap >= std::min(cw, ch)) {
        fail(ErrorCode::OverlapTooLarge, "overlap " + std::to_string(overlap) +
                                             " must be smaller than the patch side");
    }
    std::vector<OverlapGeometry> out;
    out.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const int row = static_cast<int>(i) / grid_side;
        const int col = static_cast<int>(i) % grid_side;
        EdgeFlags e{col > 0, col + 1 < grid_side, row > 0, row + 1 < grid_side};
        if (overlap == 0) e = {};
        Rect r = cells[i];
        const int x0 = r.x - (e.left ? overlap : 0);
        const int y0 = r.y - (e.top ? overlap : 0);
        const int x1 = r.x + r.width + (e.right ? overlap : 0);
        const int y1 = r.y + r.height + (e.bottom ? overlap : 0);
        out.push_back({{x0, y0, x1 - x0, y1 - y0}, e});
    }
    return out;
}

}  // namespace

std::vector<Placement> extract_overlapping(const Image& image, int grid_side, int overlap) {
    const auto geometry = overlap_geometry(image.width, image.height, grid_side, overlap);
    std::vector<Placement> placements;
    placements.reserve(geometry.size());
    for (std::size_t i = 0; i < geometry.size(); ++i) {
        const auto& g = geometry[i];
        Placement p;
        p.patch = crop(image, g.rect);
        p.x = g.rect.x;
        p.y = g.rect.y;
        p.window = feather_window(g.rect.width, g.rect.height, 2 * overlap, g.edges);
        p.cell = static_cast<int>(i);
        p.edges = g.edges;
        placements.push_back(std::move(p));
    }
    return placements;
}

Image stitch(const std::vector<Placement>& placements, int canvas_w, int canvas_h) {
    if (placements.empty()) fail(ErrorCode::UncoveredPixel, "nothing to stitch");
    const int channels = placements.front().patch.channels;
    Image acc(canvas_w, canvas_h, channels, 0.0);
    std::vector<double> weight_sum(static_cast<std::size_t>(canvas_w) *
                                       static_cast<std::size_t>(canvas_h),
                                   0.0);
    for (const auto& p : placements) {
        const Image& img = p.patch;
        if (img.channels != channels) {
            fail(ErrorCode::DimensionMismatch, "placements mix channel counts");
        }
        if (p.window.width != img.width || p.window.height != img.height) {
            fail(ErrorCode::DimensionMismatch, "weight window does not match its patch");
        }
        if (p.x < 0 || p.y < 0 || p.x + img.width > canvas_w || p.y + img.height > canvas_h) {
            fail(ErrorCode::PlacementOutOfBounds,
                 "placement at (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                     ") does not fit the canvas");
        }
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                const double w = p.window.at(x, y);
                weight_sum[static_cast<std::size_t>(p.y + y) * static_cast<std::size_t>(canvas_w) +
                           static_cast<std::size_t>(p.x + x)] += w;
                for (int c = 0; c < channels; ++c) acc.at(p.x + x, p.y + y, c) += w * img.at(x, y, c);
            }
        }
    }
    for (int y = 0; y < canvas_h; ++y) {
        for (int x = 0; x < canvas_w; ++x) {
            const double w = weight_sum[static_cast<std::size_t>(y) * static_cast<std::size_t>(canvas_w) +
                                        static_cast<std::size_t>(x)];
            if (!(w > 0.0)) {
                fail(ErrorCode::UncoveredPixel, "pixel (" + std::to_string(x) + "," +
                                                    std::to_string(y) + ") has zero weight");
            }
            for (int c = 0; c < channels; ++c) {
                acc.at(x, y, c) = std::clamp(acc.at(x, y, c) / w, 0.0, 1.0);
            }
        }
    }
    return acc;
}

namespace {

// Resample the output block [ox0, ox0+ow) x [oy0, oy0+oh) of a full `scale`x upscale of `src`.
Image resample_block(const Image& src, int scale, UpscaleMode mode, int ox0, int oy0, int ow,
                     int oh) {
    Image out(ow, oh, src.channels);
    if (mode == UpscaleMode::Nearest) {
        for (int y = 0; y < oh; ++y) {
            const int sy = (oy0 + y) / scale;
            for (int x = 0; x < ow; ++x) {
                const int sx = (ox0 + x) / scale;
                for (int c = 0; c < src.channels; ++c) out.at(x, y, c) = src.at(sx, sy, c);
            }
        }
        return out;
    }
    // Bilinear with pixel centres: source coordinate (i + 0.5) / scale - 0.5, edge-clamped.
    auto axis = [scale](int i, int n, int& i0, int& i1, double& t) {
        double s = (i + 0.5) / scale - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(n - 1));
        i0 = static_cast<int>(std::floor(s));
        i1 = std::min(i0 + 1, n - 1);
        t = s - i0;
    };
    std::vector<int> x0s(static_cast<std::size_t>(ow)), x1s(static_cast<std::size_t>(ow));
    std::vector<double> txs(static_cast<std::size_t>(ow));
    for (int x = 0; x < ow; ++x) {
        axis(ox0 + x, src.width, x0s[static_cast<std::size_t>(x)], x1s[static_cast<std::size_t>(x)],
             txs[static_cast<std::size_t>(x)]);
    }
    for (int y = 0; y < oh; ++y) {
        int y0, y1;
        double ty;
        axis(oy0 + y, src.height, y0, y1, ty);
        for (int x = 0; x < ow; ++x) {
            const auto xi = static_cast<std::size_t>(x);
            const double tx = txs[xi];
            for (int c = 0; c < src.channels; ++c) {
                const double top = src.at(x0s[xi], y0, c) * (1.0 - tx) + src.at(x1s[xi], y0, c) * tx;
                const double bot = src.at(x0s[xi], y1, c) * (1.0 - tx) + src.at(x1s[xi], y1, c) * tx;
                out.at(x, y, c) = top * (1.0 - ty) + bot * ty;
            }
        }
    }
    return out;
}

}  // namespace

Image upscale(const Image& image, int scale, UpscaleMode mode) {
    if (scale < 1) fail(ErrorCode::InvalidArgument, "upscale factor must be >= 1");
    if (scale == 1) return image;
    return resample_block(image, scale, mode, 0, 0, image.width * scale, image.height * scale);
}

Image upscale_region(const Image& image, const Rect& rect, int scale, UpscaleMode mode) {
    if (scale < 1) fail(ErrorCode::InvalidArgument, "upscale factor must be >= 1");
    // What the enhancer receives: the patch plus one pixel of context where available.
    const int x0 = std::max(0, rect.x - 1);
    const int y0 = std::max(0, rect.y - 1);
    const int x1 = std::min(image.width, rect.x + rect.width + 1);
    const int y1 = std::min(image.height, rect.y + rect.height + 1);
    const Image context = crop(image, {x0, y0, x1 - x0, y1 - y0});
    // Sampling in context coordinates; clamping only binds at true image borders
    // because interior sides carry a context pixel.
    return resample_block(context, scale, mode, (rect.x - x0) * scale, (rect.y - y0) * scale,
                          rect.width * scale, rect.height * scale);
}

EnhanceResult hybrid_enhance(const Image& image, int grid_side, const AllocationRatio& gamma,
                             int scale, int overlap) {
    if (scale < 1) fail(ErrorCode::InvalidArgument, "upscale factor must be >= 1");
    EnhanceResult result;
    result.partition = select_foreground(image, grid_side, gamma);
    const auto geometry = overlap_geometry(image.width, image.height, grid_side, overlap);

    std::vector<Placement> placements;
    placements.reserve(geometry.size());
    for (std::size_t i = 0; i < geometry.size(); ++i) {
        const Rect& r = geometry[i].rect;
        const bool fg = result.partition.is_foreground(static_cast<int>(i));
        Placement p;
        p.patch = upscale_region(image, r, scale,
                                 fg ? UpscaleMode::Bilinear : UpscaleMode::Nearest);
        p.x = r.x * scale;
        p.y = r.y * scale;
        p.window = feather_window(p.patch.width, p.patch.height, 2 * overlap * scale,
                                  geometry[i].edges);
        p.cell = static_cast<int>(i);
        p.edges = geometry[i].edges;
        placements.push_back(std::move(p));
    }
    result.image = stitch(placements, image.width * scale, image.height * scale);
    return result;
}

}  // namespace edgesr
