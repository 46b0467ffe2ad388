#include "rsg/util.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <thread>

#include "rsg/error.hpp"

namespace rsg {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::TriangleFaceFound: return "TriangleFaceFound";
        case ErrorKind::NonManifoldEdge: return "NonManifoldEdge";
        case ErrorKind::DegenerateFace: return "DegenerateFace";
        case ErrorKind::OrientationError: return "OrientationError";
        case ErrorKind::AmbiguousOrdering: return "AmbiguousOrdering";
        case ErrorKind::IsolatedFace: return "IsolatedFace";
        case ErrorKind::PreconditionViolation: return "PreconditionViolation";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::LevelMismatch: return "LevelMismatch";
        case ErrorKind::OrderingError: return "OrderingError";
        case ErrorKind::EmptyGroup: return "EmptyGroup";
        case ErrorKind::RankDeficientFit: return "RankDeficientFit";
        case ErrorKind::ConfigMismatch: return "ConfigMismatch";
        case ErrorKind::DivergenceAbort: return "DivergenceAbort";
        case ErrorKind::Internal: return "Internal";
    }
    return "Unknown";
}

int worker_count() {
    static int cached = [] {
        const char* env = std::getenv("RSG_THREADS");
        if (env != nullptr) {
            int n = std::atoi(env);
            if (n >= 1) return n;
        }
        unsigned hw = std::thread::hardware_concurrency();
        return static_cast<int>(std::min(4u, hw == 0 ? 1u : hw));
    }();
    return cached;
}

void parallel_for(int64_t n, const std::function<void(int64_t)>& fn) {
    int workers = worker_count();
    if (workers <= 1 || n < 256) {
        for (int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int64_t lo = w * chunk;
        int64_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([lo, hi, &fn] {
            for (int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : threads) t.join();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= s.size()) {
        size_t end = s.find(sep, start);
        if (end == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorKind::IoError, "cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(out.good(), ErrorKind::IoError, "write failed: " + path);
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    require(in.good(), ErrorKind::IoError, "cannot open: " + path);
    std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    require(in.good(), ErrorKind::IoError, "read failed: " + path);
    return bytes;
}

void ByteWriter::f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
}

uint8_t ByteReader::u8() {
    require(pos + 1 <= bytes->size(), ErrorKind::ParseError, "truncated binary file");
    return (*bytes)[pos++];
}

uint32_t ByteReader::u32() {
    require(pos + 4 <= bytes->size(), ErrorKind::ParseError, "truncated binary file");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>((*bytes)[pos + i]) << (8 * i);
    pos += 4;
    return v;
}

uint64_t ByteReader::u64() {
    require(pos + 8 <= bytes->size(), ErrorKind::ParseError, "truncated binary file");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>((*bytes)[pos + i]) << (8 * i);
    pos += 8;
    return v;
}

float ByteReader::f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

std::string ByteReader::str() {
    uint32_t n = u32();
    require(pos + n <= bytes->size(), ErrorKind::ParseError, "truncated string in binary file");
    std::string s(reinterpret_cast<const char*>(bytes->data() + pos), n);
    pos += n;
    return s;
}

}  // namespace rsg
