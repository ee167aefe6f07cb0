#include "doctest.h"

#include <filesystem>

#include "edgesr/error.hpp"
#include "edgesr/image.hpp"
#include "edgesr/io.hpp"
#include "edgesr/rng.hpp"

using namespace edgesr;

namespace {

Image random_image(Rng& rng, int w, int h, int c) {
    Image img(w, h, c);
    for (auto& v : img.pixels) v = static_cast<double>(rng.index(256)) / 255.0;
    return img;
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

}  // namespace

TEST_CASE("quantize rounds half up and clamps") {
    CHECK(quantize(0.0) == 0);
    CHECK(quantize(1.0) == 255);
    CHECK(quantize(-0.5) == 0);
    CHECK(quantize(2.0) == 255);
    CHECK(quantize(0.5 / 255.0) == 1);
    CHECK(quantize(0.49 / 255.0) == 0);
    CHECK(quantize(127.5 / 255.0) == 128);
}

TEST_CASE("netpbm round trip for 8-bit exact images") {
    Rng rng(1);
    for (int c : {1, 3}) {
        for (int i = 0; i < 10; ++i) {
            const Image img = random_image(rng, 1 + static_cast<int>(rng.index(40)),
                                           1 + static_cast<int>(rng.index(40)), c);
            const std::string bytes = encode_netpbm(img);
            CHECK(bytes.substr(0, 2) == (c == 1 ? "P5" : "P6"));
            CHECK(decode_netpbm(bytes) == img);
        }
    }
}

TEST_CASE("netpbm headers with comments and small maxval") {
    const std::string bytes = std::string("P5\n# a comment\n2 1\n# another\n3\n") + '\0' + '\3';
    const Image img = decode_netpbm(bytes);
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.channels == 1);
    CHECK(img.pixels[0] == 0.0);
    CHECK(img.pixels[1] == 1.0);
}

TEST_CASE("netpbm rejects malformed input") {
    CHECK(code_of([] { decode_netpbm("P3\n1 1\n255\n0"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { decode_netpbm("P5\n2 2\n255\n\1"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { decode_netpbm("P5\n1 1\n65535\n\1\1"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { decode_netpbm("P5\n1"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { read_netpbm("/nonexistent/x.pgm"); }) == ErrorCode::FileNotFound);
}

TEST_CASE("files are written atomically and read back") {
    const auto dir = std::filesystem::temp_directory_path() / "edgesr_test_image";
    std::filesystem::create_directories(dir);
    Rng rng(4);
    const Image img = random_image(rng, 7, 5, 3);
    write_netpbm(img, dir / "a.ppm");
    CHECK(read_netpbm(dir / "a.ppm") == img);
    CHECK_FALSE(std::filesystem::exists(dir / "a.ppm.tmp"));
    CHECK(code_of([&] { write_file_atomic(dir / "missing" / "x.txt", "x"); }) == ErrorCode::IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("crop") {
    Image img(4, 3, 1);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) img.at(x, y) = (x + 4 * y) / 12.0;
    const Image c = crop(img, {1, 1, 2, 2});
    CHECK(c.at(0, 0) == img.at(1, 1));
    CHECK(c.at(1, 1) == img.at(2, 2));
    CHECK(code_of([&] { crop(img, {3, 0, 2, 1}); }) == ErrorCode::DimensionMismatch);
}
