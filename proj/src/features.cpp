#include "rsg/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rsg/error.hpp"
#include "rsg/util.hpp"

namespace rsg {

namespace {

// Nearest-rank 90th percentile of absolute values.
double p90_abs(const Tensord& t, int64_t col) {
    std::vector<double> v(t.rows());
    for (int64_t i = 0; i < t.rows(); ++i) v[i] = std::fabs(t.at(i, col));
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0.0;
    auto idx = static_cast<size_t>(std::ceil(0.9 * static_cast<double>(v.size()))) - 1;
    return v[std::min(idx, v.size() - 1)];
}

void p90_normalize_column(Tensord& t, int64_t col) {
    double scale = p90_abs(t, col);
    if (scale > 1e-12)
        for (int64_t i = 0; i < t.rows(); ++i) t.at(i, col) /= scale;
}

void clamp_all(Tensord& t, double lo, double hi) {
    for (auto& x : t.data) x = std::clamp(x, lo, hi);
}

// Edge-connected vertex 1-rings and vertex->face incidence.
struct VertexTopology {
    std::vector<std::vector<int32_t>> ring;   // adjacent vertices, sorted unique
    std::vector<std::vector<int32_t>> faces;  // incident faces
};

VertexTopology vertex_topology(const QuadMesh& mesh) {
    VertexTopology t;
    t.ring.resize(mesh.vertex_count());
    t.faces.resize(mesh.vertex_count());
    for (int64_t f = 0; f < mesh.face_count(); ++f) {
        const auto& face = mesh.faces[f];
        for (int k = 0; k < 4; ++k) {
            int32_t a = face[k];
            int32_t b = face[(k + 1) % 4];
            t.ring[a].push_back(b);
            t.ring[b].push_back(a);
            t.faces[a].push_back(static_cast<int32_t>(f));
        }
    }
    for (auto& r : t.ring) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
    }
    return t;
}

double interior_angle(const Vec3& at, const Vec3& prev, const Vec3& next) {
    Vec3 u = prev - at;
    Vec3 v = next - at;
    double nu = norm(u);
    double nv = norm(v);
    if (nu <= 1e-300 || nv <= 1e-300) return 0.0;
    double c = std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
    return std::acos(c);
}

// Symmetric 2x2 eigenvalues, returned as (larger, smaller).
std::pair<double, double> eig2(double a, double b, double d) {
    double tr = a + d;
    double det = a * d - b * b;
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return {tr / 2.0 + disc, tr / 2.0 - disc};
}

}  // namespace

FeatureSpec make_feature_spec(FeatureKind kind) {
    FeatureSpec s;
    s.kind = kind;
    switch (kind) {
        case FeatureKind::kNone: s.channel_count = 0; break;
        case FeatureKind::kPosition: s.channel_count = 3; break;
        case FeatureKind::kLaplacian: s.channel_count = 3; break;
        case FeatureKind::kCurvatures: s.channel_count = 2; break;
        case FeatureKind::kFundamentalForms: s.channel_count = 8; break;
        case FeatureKind::kNormals: s.channel_count = 3; break;
        case FeatureKind::kNormalsPlusCurvature: s.channel_count = 4; break;
    }
    return s;
}

const char* feature_kind_name(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::kNone: return "none";
        case FeatureKind::kPosition: return "position";
        case FeatureKind::kLaplacian: return "laplacian";
        case FeatureKind::kCurvatures: return "curvatures";
        case FeatureKind::kFundamentalForms: return "fundamental_forms";
        case FeatureKind::kNormals: return "normals";
        case FeatureKind::kNormalsPlusCurvature: return "normals_plus_curvature";
    }
    return "?";
}

FeatureSpec parse_feature_spec(const std::string& name) {
    for (FeatureKind k : {FeatureKind::kNone, FeatureKind::kPosition, FeatureKind::kLaplacian,
                          FeatureKind::kCurvatures, FeatureKind::kFundamentalForms,
                          FeatureKind::kNormals, FeatureKind::kNormalsPlusCurvature})
        if (name == feature_kind_name(k)) return make_feature_spec(k);
    raise(ErrorKind::ParseError, "unknown feature spec '" + name + "'");
}

QuadMesh normalize_to_unit_cube(const QuadMesh& mesh) {
    require(mesh.vertex_count() > 0, ErrorKind::PreconditionViolation, "empty mesh");
    Vec3 lo = mesh.vertices[0];
    Vec3 hi = mesh.vertices[0];
    for (const auto& v : mesh.vertices) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
    }
    Vec3 center = (lo + hi) * 0.5;
    double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
    double scale = extent > 1e-300 ? 1.0 / extent : 1.0;
    QuadMesh out = mesh;
    for (auto& v : out.vertices) v = (v - center) * scale;
    return out;
}

FeatureField feature_position(const QuadMesh& mesh) {
    QuadMesh m = normalize_to_unit_cube(mesh);
    auto geom = face_geometry(m);
    Tensord t(m.face_count(), 3);
    for (int64_t f = 0; f < m.face_count(); ++f) {
        t.at(f, 0) = geom[f].centroid.x;
        t.at(f, 1) = geom[f].centroid.y;
        t.at(f, 2) = geom[f].centroid.z;
    }
    return {mesh.level_id, std::move(t)};
}

FeatureField feature_normals(const QuadMesh& mesh) {
    auto geom = face_geometry(mesh);
    Tensord t(mesh.face_count(), 3);
    for (int64_t f = 0; f < mesh.face_count(); ++f) {
        t.at(f, 0) = geom[f].normal.x;
        t.at(f, 1) = geom[f].normal.y;
        t.at(f, 2) = geom[f].normal.z;
    }
    return {mesh.level_id, std::move(t)};
}

FeatureField feature_laplacian(const QuadMesh& mesh, const NeighborhoodTable& nbr) {
    require(nbr.face_count() == mesh.face_count(), ErrorKind::ShapeMismatch,
            "neighborhood table does not match mesh");
    QuadMesh m = normalize_to_unit_cube(mesh);
    auto geom = face_geometry(m);
    Tensord t(m.face_count(), 3);
    for (int64_t f = 0; f < m.face_count(); ++f) {
        Vec3 acc{0, 0, 0};
        int real = 0;
        for (int32_t n : nbr.neighbors[f]) {
            if (n == kNoNeighbor) continue;
            acc += geom[n].centroid;
            ++real;
        }
        require(real > 0, ErrorKind::IsolatedFace,
                "face " + std::to_string(f) + " has no real neighbors");
        Vec3 d = acc * (1.0 / real) - geom[f].centroid;
        t.at(f, 0) = d.x;
        t.at(f, 1) = d.y;
        t.at(f, 2) = d.z;
    }
    return {mesh.level_id, std::move(t)};
}

Tensord vertex_curvatures(const QuadMesh& mesh) {
    auto topo = vertex_topology(mesh);
    auto geom = face_geometry(mesh);
    Tensord out = Tensord::zeros(mesh.vertex_count(), 2);

    parallel_for(mesh.vertex_count(), [&](int64_t v) {
        const Vec3 p = mesh.vertices[v];

        // Angle defect over incident faces; Voronoi-style area = sum/4.
        double angle_sum = 0.0;
        double area = 0.0;
        Vec3 normal_acc{0, 0, 0};
        for (int32_t fi : topo.faces[v]) {
            const auto& face = mesh.faces[fi];
            int k = 0;
            while (face[k] != static_cast<int32_t>(v)) ++k;
            angle_sum += interior_angle(p, mesh.vertices[face[(k + 3) % 4]],
                                        mesh.vertices[face[(k + 1) % 4]]);
            area += geom[fi].area / 4.0;
            normal_acc += geom[fi].normal;
        }
        double gaussian = area > 1e-300 ? (2.0 * kPi - angle_sum) / area : 0.0;

        // Umbrella Laplacian of positions; the chord-length scaling below is
        // exact on a sphere (unit sphere -> H = 1 identically).
        Vec3 n = normalized(normal_acc);
        const auto& ring = topo.ring[v];
        double mean = 0.0;
        if (!ring.empty()) {
            Vec3 acc{0, 0, 0};
            double d2 = 0.0;
            for (int32_t q : ring) {
                acc += mesh.vertices[q];
                d2 += norm2(mesh.vertices[q] - p);
            }
            Vec3 lap = acc * (1.0 / static_cast<double>(ring.size())) - p;
            d2 /= static_cast<double>(ring.size());
            if (d2 > 1e-300) mean = -2.0 * dot(lap, n) / d2;
        }
        out.at(v, 0) = mean;
        out.at(v, 1) = gaussian;
    });
    return out;
}

Tensord face_curvatures_raw(const QuadMesh& mesh) {
    Tensord per_vertex = vertex_curvatures(mesh);
    Tensord out(mesh.face_count(), 2);
    for (int64_t f = 0; f < mesh.face_count(); ++f) {
        double h = 0.0;
        double k = 0.0;
        for (int32_t v : mesh.faces[f]) {
            h += per_vertex.at(v, 0);
            k += per_vertex.at(v, 1);
        }
        out.at(f, 0) = h / 4.0;
        out.at(f, 1) = k / 4.0;
    }
    return out;
}

FeatureField feature_curvatures(const QuadMesh& mesh) {
    Tensord t = face_curvatures_raw(normalize_to_unit_cube(mesh));
    p90_normalize_column(t, 0);
    p90_normalize_column(t, 1);
    clamp_all(t, -10.0, 10.0);
    return {mesh.level_id, std::move(t)};
}

Tensord fundamental_forms_raw(const QuadMesh& mesh, const NeighborhoodTable& nbr,
                              int64_t* rank_deficient_count) {
    require(nbr.face_count() == mesh.face_count(), ErrorKind::ShapeMismatch,
            "neighborhood table does not match mesh");
    auto geom = face_geometry(mesh);
    Tensord out = Tensord::zeros(mesh.face_count(), 8);
    std::vector<int64_t> deficient(mesh.face_count(), 0);

    parallel_for(mesh.face_count(), [&](int64_t f) {
        const auto& face = mesh.faces[f];
        const Vec3 p0 = mesh.vertices[face[0]];
        const Vec3 p1 = mesh.vertices[face[1]];
        const Vec3 p2 = mesh.vertices[face[2]];
        const Vec3 p3 = mesh.vertices[face[3]];
        const Vec3 n = geom[f].normal;
        Vec3 t1 = normalized(p1 - p0);
        Vec3 t2 = cross(n, t1);

        // Bilinear parameter directions of the quad, area-normalized so the
        // first form is scale invariant (unit square -> E,F,G = 1,0,1).
        Vec3 du = (p1 - p0 + p2 - p3) * 0.5;
        Vec3 dv = (p3 - p0 + p2 - p1) * 0.5;
        double area = std::max(geom[f].area, 1e-300);
        out.at(f, 0) = dot(du, du) / area;
        out.at(f, 1) = dot(du, dv) / area;
        out.at(f, 2) = dot(dv, dv) / area;

        // Least-squares shape operator: neighbor normal variation against
        // tangent-plane centroid offsets, in the orthonormal frame (t1, t2).
        double gxx = 0, gxy = 0, gyy = 0;
        double bx1 = 0, by1 = 0, bx2 = 0, by2 = 0;
        for (int32_t j : nbr.neighbors[f]) {
            if (j == kNoNeighbor) continue;
            Vec3 dc = geom[j].centroid - geom[f].centroid;
            Vec3 dn = geom[j].normal - n;
            double x = dot(dc, t1), y = dot(dc, t2);
            double u = dot(dn, t1), v = dot(dn, t2);
            gxx += x * x;
            gxy += x * y;
            gyy += y * y;
            bx1 += x * u;
            by1 += y * u;
            bx2 += x * v;
            by2 += y * v;
        }
        double det = gxx * gyy - gxy * gxy;
        double trace = gxx + gyy;
        if (det <= 1e-12 * std::max(trace * trace, 1e-300)) {
            deficient[f] = 1;  // flat fallback, second form stays zero
            return;
        }
        // Rows of S solve G * s_row = b_row.
        double s11 = (gyy * bx1 - gxy * by1) / det;
        double s12 = (gxx * by1 - gxy * bx1) / det;
        double s21 = (gyy * bx2 - gxy * by2) / det;
        double s22 = (gxx * by2 - gxy * bx2) / det;
        double l = s11;
        double m = (s12 + s21) / 2.0;
        double nn = s22;
        auto [k1, k2] = eig2(l, m, nn);
        out.at(f, 3) = l;
        out.at(f, 4) = m;
        out.at(f, 5) = nn;
        out.at(f, 6) = k1;
        out.at(f, 7) = k2;
    });

    if (rank_deficient_count) {
        int64_t total = 0;
        for (int64_t d : deficient) total += d;
        *rank_deficient_count += total;
    }
    return out;
}

FeatureField feature_fundamental_forms(const QuadMesh& mesh, const NeighborhoodTable& nbr,
                                       int64_t* rank_deficient_count) {
    Tensord t = fundamental_forms_raw(normalize_to_unit_cube(mesh), nbr, rank_deficient_count);
    for (int64_t c = 3; c < 8; ++c) p90_normalize_column(t, c);
    clamp_all(t, -10.0, 10.0);
    return {mesh.level_id, std::move(t)};
}

FeatureField assemble_input(const QuadMesh& mesh, const NeighborhoodTable& nbr,
                            const FeatureSpec& spec) {
    switch (spec.kind) {
        case FeatureKind::kNone:
            return {mesh.level_id, Tensord(mesh.face_count(), 0)};
        case FeatureKind::kPosition:
            return feature_position(mesh);
        case FeatureKind::kLaplacian:
            return feature_laplacian(mesh, nbr);
        case FeatureKind::kCurvatures:
            return feature_curvatures(mesh);
        case FeatureKind::kFundamentalForms:
            return feature_fundamental_forms(mesh, nbr);
        case FeatureKind::kNormals:
            return feature_normals(mesh);
        case FeatureKind::kNormalsPlusCurvature: {
            FeatureField n = feature_normals(mesh);
            FeatureField c = feature_curvatures(mesh);
            Tensord t(mesh.face_count(), 4);
            for (int64_t f = 0; f < mesh.face_count(); ++f) {
                t.at(f, 0) = n.values.at(f, 0);
                t.at(f, 1) = n.values.at(f, 1);
                t.at(f, 2) = n.values.at(f, 2);
                t.at(f, 3) = c.values.at(f, 0);
            }
            return {mesh.level_id, std::move(t)};
        }
    }
    raise(ErrorKind::Internal, "unhandled feature kind");
}

void save_features(const FeatureField& field, const std::string& path) {
    ByteWriter w;
    w.bytes = {'R', 'S', 'F', 'F'};
    w.u32(static_cast<uint32_t>(field.values.rows()));
    w.u32(static_cast<uint32_t>(field.values.cols()));
    for (double x : field.values.data) w.f32(static_cast<float>(x));
    write_file_bytes(path, w.bytes);
}

FeatureField load_features(const std::string& path) {
    auto bytes = read_file_bytes(path);
    require(bytes.size() >= 12 && bytes[0] == 'R' && bytes[1] == 'S' && bytes[2] == 'F' &&
                bytes[3] == 'F',
            ErrorKind::ParseError, "not an RSFF file: " + path);
    ByteReader r(bytes);
    r.pos = 4;
    uint32_t rows = r.u32();
    uint32_t cols = r.u32();
    Tensord t(rows, cols);
    for (auto& x : t.data) x = r.f32();
    return {1, std::move(t)};
}

}  // namespace rsg
