#include "rsg/checkpoint.hpp"

#include "rsg/error.hpp"
#include "rsg/util.hpp"

namespace rsg {

void save_checkpoint(const std::string& path, const std::map<std::string, Tensorf>& entries) {
    ByteWriter w;
    w.bytes = {'R', 'S', 'C', 'K'};
    w.u32(1);  // version
    w.u64(entries.size());
    for (const auto& [name, t] : entries) {  // std::map iterates sorted
        w.str(name);
        w.u32(0);  // dtype f32
        w.u32(2);  // rank
        w.u64(static_cast<uint64_t>(t.rows()));
        w.u64(static_cast<uint64_t>(t.cols()));
        for (float x : t.data) w.f32(x);
    }
    write_file_bytes(path, w.bytes);
}

std::map<std::string, Tensorf> load_checkpoint(const std::string& path) {
    auto bytes = read_file_bytes(path);
    require(bytes.size() >= 8 && bytes[0] == 'R' && bytes[1] == 'S' && bytes[2] == 'C' &&
                bytes[3] == 'K',
            ErrorKind::ParseError, "not an RSCK file: " + path);
    ByteReader r(bytes);
    r.pos = 4;
    uint32_t version = r.u32();
    require(version == 1, ErrorKind::ParseError, "unsupported RSCK version");
    uint64_t count = r.u64();
    std::map<std::string, Tensorf> entries;
    for (uint64_t i = 0; i < count; ++i) {
        std::string name = r.str();
        uint32_t dtype = r.u32();
        uint32_t rank = r.u32();
        require(dtype == 0 && rank == 2, ErrorKind::ParseError,
                "unsupported tensor encoding in " + path);
        int64_t rows = static_cast<int64_t>(r.u64());
        int64_t cols = static_cast<int64_t>(r.u64());
        Tensorf t(rows, cols);
        for (auto& x : t.data) x = r.f32();
        entries.emplace(std::move(name), std::move(t));
    }
    return entries;
}

}  // namespace rsg
