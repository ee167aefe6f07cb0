#include "edgesr/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "edgesr/error.hpp"
#include "edgesr/io.hpp"

namespace edgesr {

Image::Image(int w, int h, int c, double fill) : width(w), height(h), channels(c) {
    if (w <= 0 || h <= 0) fail(ErrorCode::InvalidArgument, "image dimensions must be positive");
    if (c != 1 && c != 3) fail(ErrorCode::InvalidArgument, "images have 1 or 3 channels");
    pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) *
                      static_cast<std::size_t>(c),
                  fill);
}

Image crop(const Image& image, const Rect& rect) {
    if (rect.x < 0 || rect.y < 0 || rect.width <= 0 || rect.height <= 0 ||
        rect.x + rect.width > image.width || rect.y + rect.height > image.height) {
        fail(ErrorCode::DimensionMismatch, "crop rectangle outside the image");
    }
    Image out(rect.width, rect.height, image.channels);
    const auto row = static_cast<std::size_t>(rect.width) * static_cast<std::size_t>(image.channels);
    for (int y = 0; y < rect.height; ++y) {
        const auto src = image.pixels.begin() + static_cast<std::ptrdiff_t>(image.index(rect.x, rect.y + y));
        std::copy_n(src, row, out.pixels.begin() + static_cast<std::ptrdiff_t>(out.index(0, y)));
    }
    return out;
}

unsigned char quantize(double value) noexcept {
    const double v = std::clamp(value, 0.0, 1.0) * 255.0;
    return static_cast<unsigned char>(std::floor(v + 0.5));
}

namespace {

class HeaderReader {
public:
    explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

    int next_int() {
        skip_space_and_comments();
        std::size_t start = pos_;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
        if (start == pos_) fail(ErrorCode::ParseError, "netpbm: malformed header");
        if (pos_ - start > 9) fail(ErrorCode::ParseError, "netpbm: header value too large");
        return std::stoi(bytes_.substr(start, pos_ - start));
    }

    // Exactly one whitespace byte separates the header from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            fail(ErrorCode::ParseError, "netpbm: missing separator before raster");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char ch = bytes_[pos_];
            if (ch == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::string& bytes_;
    std::size_t pos_ = 2;
};

}  // namespace

Image decode_netpbm(const std::string& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        fail(ErrorCode::ParseError, "netpbm: only binary P5/P6 is supported");
    }
    const int channels = bytes[1] == '5' ? 1 : 3;
    HeaderReader header(bytes);
    const int w = header.next_int();
    const int h = header.next_int();
    const int maxval = header.next_int();
    if (w <= 0 || h <= 0) fail(ErrorCode::ParseError, "netpbm: non-positive dimensions");
    if (maxval <= 0 || maxval > 255) fail(ErrorCode::ParseError, "netpbm: maxval must be 1..255");
    const std::size_t offset = header.raster_offset();
    const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) *
                              static_cast<std::size_t>(channels);
    if (bytes.size() < offset + count) fail(ErrorCode::ParseError, "netpbm: truncated raster");

    Image img(w, h, channels);
    for (std::size_t i = 0; i < count; ++i) {
        const auto v = static_cast<unsigned char>(bytes[offset + i]);
        img.pixels[i] = std::min(1.0, static_cast<double>(v) / maxval);
    }
    return img;
}

std::string encode_netpbm(const Image& image) {
    std::ostringstream out;
    out << (image.channels == 1 ? "P5" : "P6") << '\n'
        << image.width << ' ' << image.height << '\n'
        << 255 << '\n';
    std::string data = out.str();
    const std::size_t header = data.size();
    data.resize(header + image.pixels.size());
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        data[header + i] = static_cast<char>(quantize(image.pixels[i]));
    }
    return data;
}

Image read_netpbm(const std::filesystem::path& path) {
    return decode_netpbm(read_file(path));
}

void write_netpbm(const Image& image, const std::filesystem::path& path) {
    write_file_atomic(path, encode_netpbm(image));
}

}  // namespace edgesr
