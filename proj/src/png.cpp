#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rsg/error.hpp"
#include "rsg/render.hpp"
#include "rsg/util.hpp"

namespace rsg {

namespace {

void put_u32_be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& data) {
    put_u32_be(out, static_cast<uint32_t>(data.size()));
    size_t type_at = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    uLong crc = crc32(0L, out.data() + type_at, static_cast<uInt>(4 + data.size()));
    put_u32_be(out, static_cast<uint32_t>(crc));
}

}  // namespace

void write_png(const std::string& path, const Tensord& image, int64_t height, int64_t width) {
    require(image.rows() == height * width && image.cols() == 3, ErrorKind::ShapeMismatch,
            "write_png: image must be (H*W) x 3");

    // Filter byte 0 per scanline, then raw RGB bytes.
    std::vector<uint8_t> raw;
    raw.reserve(height * (1 + width * 3));
    for (int64_t y = 0; y < height; ++y) {
        raw.push_back(0);
        for (int64_t x = 0; x < width; ++x)
            for (int64_t c = 0; c < 3; ++c) {
                double v = std::clamp(image.at(y * width + x, c), 0.0, 1.0);
                raw.push_back(static_cast<uint8_t>(std::lround(v * 255.0)));
            }
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> compressed(bound);
    int rc = compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9);
    require(rc == Z_OK, ErrorKind::Internal, "zlib compression failed");
    compressed.resize(bound);

    std::vector<uint8_t> out = {137, 'P', 'N', 'G', 13, 10, 26, 10};
    std::vector<uint8_t> ihdr;
    put_u32_be(ihdr, static_cast<uint32_t>(width));
    put_u32_be(ihdr, static_cast<uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor RGB
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // interlace
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", compressed);
    put_chunk(out, "IEND", {});
    write_file_bytes(path, out);
}

}  // namespace rsg
