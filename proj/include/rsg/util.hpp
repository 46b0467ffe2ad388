#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rsg {

// Worker count for embarrassingly parallel loops. Controlled by RSG_THREADS;
// defaults to a small fixed count. Every parallel_for call writes disjoint
// output slots, so results do not depend on the thread count.
int worker_count();

// Runs fn(i) for i in [0, n). Falls back to a serial loop for small n.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);

// Binary file helpers; all integers little-endian.
void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes);
std::vector<uint8_t> read_file_bytes(const std::string& path);

struct ByteWriter {
    std::vector<uint8_t> bytes;
    void u8(uint8_t v) { bytes.push_back(v); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void f32(float v);
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
};

struct ByteReader {
    const std::vector<uint8_t>* bytes;
    size_t pos = 0;
    explicit ByteReader(const std::vector<uint8_t>& b) : bytes(&b) {}
    uint8_t u8();
    uint32_t u32();
    uint64_t u64();
    float f32();
    std::string str();
    bool done() const { return pos >= bytes->size(); }
};

}  // namespace rsg
