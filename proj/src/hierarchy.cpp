#include "rsg/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "rsg/error.hpp"
#include "rsg/util.hpp"

namespace rsg {

namespace {

constexpr uint32_t kSentinelU32 = 0xFFFFFFFFu;

void check_level(const FeatureField& f, int level, const MeshHierarchy& h, const char* op) {
    require(f.level == level, ErrorKind::LevelMismatch,
            std::string(op) + ": field is at level " + std::to_string(f.level) + ", expected " +
                std::to_string(level));
    require(f.face_count() == h.face_count(level), ErrorKind::LevelMismatch,
            std::string(op) + ": row count " + std::to_string(f.face_count()) +
                " != face count of level " + std::to_string(level));
}

}  // namespace

MeshHierarchy build_hierarchy(std::vector<QuadMesh> level_meshes, bool allow_empty_groups) {
    require(level_meshes.size() >= 2, ErrorKind::PreconditionViolation,
            "hierarchy needs at least 2 levels");
    // Equal counts are allowed (a level may reuse the same remeshing); an
    // increase means the caller got the order wrong.
    for (size_t i = 0; i + 1 < level_meshes.size(); ++i)
        require(level_meshes[i].face_count() >= level_meshes[i + 1].face_count(),
                ErrorKind::OrderingError, "face counts must be non-increasing with level");

    MeshHierarchy h;
    for (size_t i = 0; i < level_meshes.size(); ++i) {
        validate_mesh(level_meshes[i]);
        HierarchyLevel level;
        level.mesh = std::move(level_meshes[i]);
        level.mesh.level_id = static_cast<int>(i + 1);
        level.table = build_neighborhood(level.mesh);
        h.levels.push_back(std::move(level));
    }

    for (int p = 0; p + 1 < h.level_count(); ++p) {
        const auto fine_geom = face_geometry(h.levels[p].mesh);
        const auto coarse_geom = face_geometry(h.levels[p + 1].mesh);
        int64_t nf = h.levels[p].mesh.face_count();
        int64_t nc = h.levels[p + 1].mesh.face_count();

        std::vector<int32_t> assignment(nf, 0);
        parallel_for(nf, [&](int64_t f) {
            double best = std::numeric_limits<double>::infinity();
            int32_t best_c = 0;
            for (int64_t c = 0; c < nc; ++c) {
                double d = norm2(coarse_geom[c].centroid - fine_geom[f].centroid);
                if (d < best) {
                    best = d;
                    best_c = static_cast<int32_t>(c);
                }
            }
            assignment[f] = best_c;
        });

        std::vector<std::vector<int32_t>> groups(nc);
        for (int64_t f = 0; f < nf; ++f) groups[assignment[f]].push_back(static_cast<int32_t>(f));
        for (int64_t c = 0; c < nc; ++c) {
            if (groups[c].empty()) {
                require(allow_empty_groups, ErrorKind::EmptyGroup,
                        "coarse face " + std::to_string(c) + " of level " + std::to_string(p + 2) +
                            " owns no fine faces");
                ++h.empty_group_count;
            }
        }
        h.pool_assignment.push_back(std::move(assignment));
        h.pool_groups.push_back(std::move(groups));
    }
    return h;
}

FeatureField pool(const FeatureField& features, const MeshHierarchy& h) {
    int l = features.level;
    require(l >= 1 && l < h.level_count(), ErrorKind::LevelMismatch,
            "pool: no coarser level than " + std::to_string(l));
    check_level(features, l, h, "pool");

    const auto& groups = h.pool_groups[l - 1];
    int64_t c_channels = features.channels();
    FeatureField out(l + 1, Tensord::zeros(h.face_count(l + 1), c_channels));
    for (int64_t j = 0; j < out.face_count(); ++j) {
        const auto& group = groups[j];
        if (group.empty()) continue;
        for (int32_t f : group)
            for (int64_t c = 0; c < c_channels; ++c) out.values.at(j, c) += features.values.at(f, c);
        double inv = 1.0 / static_cast<double>(group.size());
        for (int64_t c = 0; c < c_channels; ++c) out.values.at(j, c) *= inv;
    }
    return out;
}

FeatureField unpool(const FeatureField& features, const MeshHierarchy& h) {
    int l = features.level;
    require(l >= 2 && l <= h.level_count(), ErrorKind::LevelMismatch,
            "unpool: no finer level than " + std::to_string(l));
    check_level(features, l, h, "unpool");

    const auto& assignment = h.pool_assignment[l - 2];
    int64_t c_channels = features.channels();
    FeatureField out(l - 1, Tensord::zeros(h.face_count(l - 1), c_channels));
    for (int64_t f = 0; f < out.face_count(); ++f)
        for (int64_t c = 0; c < c_channels; ++c)
            out.values.at(f, c) = features.values.at(assignment[f], c);
    return out;
}

FeatureField pool_backward(const FeatureField& grad_out, const MeshHierarchy& h) {
    int lc = grad_out.level;  // coarse level l+1
    require(lc >= 2 && lc <= h.level_count(), ErrorKind::LevelMismatch, "pool_backward: bad level");
    check_level(grad_out, lc, h, "pool_backward");

    const auto& groups = h.pool_groups[lc - 2];
    int64_t c_channels = grad_out.channels();
    FeatureField out(lc - 1, Tensord::zeros(h.face_count(lc - 1), c_channels));
    for (int64_t j = 0; j < grad_out.face_count(); ++j) {
        const auto& group = groups[j];
        if (group.empty()) continue;
        double inv = 1.0 / static_cast<double>(group.size());
        for (int32_t f : group)
            for (int64_t c = 0; c < c_channels; ++c)
                out.values.at(f, c) = grad_out.values.at(j, c) * inv;
    }
    return out;
}

FeatureField unpool_backward(const FeatureField& grad_out, const MeshHierarchy& h) {
    int lf = grad_out.level;  // fine level l
    require(lf >= 1 && lf < h.level_count(), ErrorKind::LevelMismatch, "unpool_backward: bad level");
    check_level(grad_out, lf, h, "unpool_backward");

    const auto& assignment = h.pool_assignment[lf - 1];
    int64_t c_channels = grad_out.channels();
    FeatureField out(lf + 1, Tensord::zeros(h.face_count(lf + 1), c_channels));
    for (int64_t f = 0; f < grad_out.face_count(); ++f)
        for (int64_t c = 0; c < c_channels; ++c)
            out.values.at(assignment[f], c) += grad_out.values.at(f, c);
    return out;
}

void save_hierarchy(const MeshHierarchy& h, const std::string& path) {
    ByteWriter w;
    w.bytes = {'R', 'S', 'H', 'Y'};
    w.u32(1);  // version
    w.u32(static_cast<uint32_t>(h.level_count()));
    for (const auto& level : h.levels) {
        w.u32(static_cast<uint32_t>(level.mesh.vertex_count()));
        w.u32(static_cast<uint32_t>(level.mesh.face_count()));
        for (const auto& v : level.mesh.vertices) {
            w.f32(static_cast<float>(v.x));
            w.f32(static_cast<float>(v.y));
            w.f32(static_cast<float>(v.z));
        }
        for (const auto& f : level.mesh.faces)
            for (int32_t idx : f) w.u32(static_cast<uint32_t>(idx));
        for (const auto& row : level.table.neighbors)
            for (int32_t n : row) w.u32(n == kNoNeighbor ? kSentinelU32 : static_cast<uint32_t>(n));
        w.f32(static_cast<float>(level.table.singular_vertex_fraction));
        w.u32(static_cast<uint32_t>(level.table.ambiguous_angle_count));
        w.u32(static_cast<uint32_t>(level.table.truncation_count));
    }
    for (const auto& assignment : h.pool_assignment) {
        w.u32(static_cast<uint32_t>(assignment.size()));
        for (int32_t a : assignment) w.u32(static_cast<uint32_t>(a));
    }
    w.u32(static_cast<uint32_t>(h.empty_group_count));
    write_file_bytes(path, w.bytes);
}

MeshHierarchy load_hierarchy(const std::string& path) {
    auto bytes = read_file_bytes(path);
    require(bytes.size() >= 4 && bytes[0] == 'R' && bytes[1] == 'S' && bytes[2] == 'H' && bytes[3] == 'Y',
            ErrorKind::ParseError, "not an RSHY file: " + path);
    ByteReader r(bytes);
    r.pos = 4;
    uint32_t version = r.u32();
    require(version == 1, ErrorKind::ParseError, "unsupported RSHY version " + std::to_string(version));

    MeshHierarchy h;
    uint32_t level_count = r.u32();
    for (uint32_t l = 0; l < level_count; ++l) {
        HierarchyLevel level;
        uint32_t nv = r.u32();
        uint32_t nf = r.u32();
        level.mesh.level_id = static_cast<int>(l + 1);
        level.mesh.vertices.resize(nv);
        for (auto& v : level.mesh.vertices) {
            v.x = r.f32();
            v.y = r.f32();
            v.z = r.f32();
        }
        level.mesh.faces.resize(nf);
        for (auto& f : level.mesh.faces)
            for (auto& idx : f) idx = static_cast<int32_t>(r.u32());
        level.table.neighbors.resize(nf);
        for (auto& row : level.table.neighbors)
            for (auto& n : row) {
                uint32_t raw = r.u32();
                n = raw == kSentinelU32 ? kNoNeighbor : static_cast<int32_t>(raw);
            }
        level.table.singular_vertex_fraction = r.f32();
        level.table.ambiguous_angle_count = r.u32();
        level.table.truncation_count = r.u32();
        h.levels.push_back(std::move(level));
    }
    for (uint32_t p = 0; p + 1 < level_count; ++p) {
        uint32_t n = r.u32();
        std::vector<int32_t> assignment(n);
        for (auto& a : assignment) a = static_cast<int32_t>(r.u32());
        require(static_cast<int64_t>(n) == h.levels[p].mesh.face_count(), ErrorKind::ParseError,
                "assignment array size mismatch in " + path);
        std::vector<std::vector<int32_t>> groups(h.levels[p + 1].mesh.face_count());
        for (size_t f = 0; f < assignment.size(); ++f) {
            require(assignment[f] >= 0 &&
                        assignment[f] < static_cast<int32_t>(h.levels[p + 1].mesh.face_count()),
                    ErrorKind::ParseError, "assignment index out of range in " + path);
            groups[assignment[f]].push_back(static_cast<int32_t>(f));
        }
        h.pool_assignment.push_back(std::move(assignment));
        h.pool_groups.push_back(std::move(groups));
    }
    h.empty_group_count = r.u32();
    return h;
}

void validate_hierarchy(const MeshHierarchy& h) {
    require(h.level_count() >= 2, ErrorKind::PreconditionViolation, "hierarchy has < 2 levels");
    for (int l = 0; l + 1 < h.level_count(); ++l)
        require(h.levels[l].mesh.face_count() >= h.levels[l + 1].mesh.face_count(),
                ErrorKind::OrderingError, "face counts increase with level");

    for (const auto& level : h.levels) {
        validate_mesh(level.mesh);
        require(level.table.face_count() == level.mesh.face_count(), ErrorKind::ShapeMismatch,
                "neighborhood table size mismatch");
        // Symmetry of the adjacency relation over non-sentinel entries.
        for (int64_t f = 0; f < level.table.face_count(); ++f) {
            for (int32_t n : level.table.neighbors[f]) {
                if (n == kNoNeighbor) continue;
                if (level.table.truncation_count > 0) continue;  // truncation may break symmetry
                const auto& row = level.table.neighbors[n];
                require(std::find(row.begin(), row.end(), static_cast<int32_t>(f)) != row.end(),
                        ErrorKind::Internal, "asymmetric neighborhood row at face " + std::to_string(f));
            }
        }
    }

    for (int p = 0; p + 1 < h.level_count(); ++p) {
        int64_t nf = h.levels[p].mesh.face_count();
        const auto& assignment = h.pool_assignment[p];
        const auto& groups = h.pool_groups[p];
        require(static_cast<int64_t>(assignment.size()) == nf, ErrorKind::ShapeMismatch,
                "assignment size mismatch");
        int64_t total = 0;
        std::set<int32_t> seen;
        for (size_t j = 0; j < groups.size(); ++j) {
            for (int32_t f : groups[j]) {
                require(assignment[f] == static_cast<int32_t>(j), ErrorKind::Internal,
                        "pool groups and assignment disagree");
                require(seen.insert(f).second, ErrorKind::Internal, "fine face in two pool groups");
            }
            total += static_cast<int64_t>(groups[j].size());
        }
        require(total == nf, ErrorKind::Internal, "pool groups do not partition the fine level");
    }
}

}  // namespace rsg
