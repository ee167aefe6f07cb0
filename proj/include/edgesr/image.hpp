#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace edgesr {

// Row-major, channel-interleaved image with values in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;  // 1 or 3
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0);

    std::size_t index(int x, int y, int c = 0) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels) +
               static_cast<std::size_t>(c);
    }
    double& at(int x, int y, int c = 0) noexcept { return pixels[index(x, y, c)]; }
    double at(int x, int y, int c = 0) const noexcept { return pixels[index(x, y, c)]; }

    bool operator==(const Image&) const = default;
};

// Axis-aligned pixel rectangle.
struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool operator==(const Rect&) const = default;
};

Image crop(const Image& image, const Rect& rect);

// Binary Netpbm: P5 (grey) and P6 (RGB), 8-bit. Values map to [0,1] by v/255.
Image read_netpbm(const std::filesystem::path& path);
Image decode_netpbm(const std::string& bytes);
// Quantises with round-half-up and writes P5 or P6 according to the channel count.
std::string encode_netpbm(const Image& image);
void write_netpbm(const Image& image, const std::filesystem::path& path);

unsigned char quantize(double value) noexcept;

}  // namespace edgesr
