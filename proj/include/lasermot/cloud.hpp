#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lasermot/error.hpp"
#include "lasermot/geometry.hpp"
#include "lasermot/types.hpp"

namespace lasermot::cloud {

// Per-frame laser returns, millimeters, camera (sensor) frame.
struct PointCloud {
    int frame = 0;
    std::vector<Point3> points;
};

// Pinhole intrinsics plus the camera->world extrinsic.
struct CameraModel {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int image_width = 0;   // 0 = unknown
    int image_height = 0;  // 0 = unknown
    geometry::RigidTransform cam_to_world =
        geometry::RigidTransform::identity(Frame::Camera, Frame::World);

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0)) throw contract_error("focal lengths must be positive");
        if (cam_to_world.src != Frame::Camera || cam_to_world.dst != Frame::World)
            throw contract_error("cam_to_world must map camera -> world");
    }
};

inline const std::vector<std::string>& class_names() {
    static const std::vector<std::string> names{"car", "bicycle", "people", "truck",
                                                "bus", "tricycle", "moto"};
    return names;
}

// One per-frame 2D box with class and confidence; the pipeline's input unit.
struct Detection {
    int frame = 0;
    int class_id = 0;  // index into class_names()
    double left = 0.0, top = 0.0, width = 0.0, height = 0.0;  // pixels
    double confidence = 1.0;

    void validate() const {
        if (class_id < 0 || class_id >= static_cast<int>(class_names().size()))
            throw contract_error("class_id out of range");
        if (!(width > 0.0) || !(height > 0.0)) throw contract_error("bbox extent must be positive");
        if (confidence < 0.0 || confidence > 1.0)
            throw contract_error("confidence must lie in [0,1]");
    }

    double center_u() const { return left + width / 2.0; }
    double center_v() const { return top + height / 2.0; }
};

// World plane given by unit normal and offset: {x : n.x = offset}.
struct ProjectionPlane {
    Vec3 normal{0.0, 0.0, 1.0};
    double offset_mm = 0.0;

    ProjectionPlane() = default;

    ProjectionPlane(const Vec3& n, double offset) : normal(n.normalized()), offset_mm(offset) {}

    static ProjectionPlane ground() { return {}; }

    // Deterministic in-plane basis: take the world axis least aligned
    // with the normal (preferring x, then y, then z on ties), project it
    // into the plane, and complete with the cross product.
    void basis(Vec3& e1, Vec3& e2) const {
        const Vec3 axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        int best = 0;
        double best_align = std::abs(normal.dot(axes[0]));
        for (int i = 1; i < 3; ++i) {
            const double a = std::abs(normal.dot(axes[i]));
            if (a < best_align) {
                best = i;
                best_align = a;
            }
        }
        const Vec3 seed = axes[best];
        e1 = (seed - normal * normal.dot(seed)).normalized();
        e2 = normal.cross(e1);
    }
};

// ---------------------------------------------------------------------------
// ASCII XYZ I/O: one "x y z" triple per line, '#' comments allowed
// ---------------------------------------------------------------------------

inline PointCloud load_xyz(std::istream& in, int frame = 0) {
    PointCloud c;
    c.frame = frame;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream row(line);
        std::string tx, ty, tz;
        if (!(row >> tx)) continue;  // blank or comment-only line
        if (!(row >> ty >> tz)) throw format_error("expected three coordinates", line_no);
        std::string extra;
        if (row >> extra) throw format_error("trailing token '" + extra + "'", line_no);
        try {
            size_t px = 0, py = 0, pz = 0;
            const double x = std::stod(tx, &px);
            const double y = std::stod(ty, &py);
            const double z = std::stod(tz, &pz);
            if (px != tx.size() || py != ty.size() || pz != tz.size())
                throw std::invalid_argument("trailing garbage");
            c.points.push_back(camera_point(x, y, z));
        } catch (const std::exception&) {
            throw format_error("non-numeric coordinate", line_no);
        }
    }
    return c;
}

inline PointCloud load_xyz(const std::string& text, int frame = 0) {
    std::istringstream in(text);
    return load_xyz(in, frame);
}

inline void save_xyz(const PointCloud& c, std::ostream& out) {
    char buf[96];
    for (const auto& p : c.points) {
        std::snprintf(buf, sizeof buf, "%.3f %.3f %.3f\n", p.x(), p.y(), p.z());
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// Statistical outlier removal
// ---------------------------------------------------------------------------

// Drop points whose mean distance to their k nearest neighbors exceeds
// mean + mult * stddev over the whole cloud. Clouds with at most k points
// pass through unchanged. Brute-force kNN; fine for desk-scale clouds.
inline PointCloud denoise_statistical(const PointCloud& c, int k, double mult) {
    if (k < 1) throw contract_error("k must be >= 1");
    if (!(mult > 0.0)) throw contract_error("mult must be positive");
    const size_t n = c.points.size();
    if (n <= static_cast<size_t>(k)) return c;

    std::vector<double> mean_dist(n, 0.0);
    std::vector<double> dists(n - 1);
    for (size_t i = 0; i < n; ++i) {
        size_t m = 0;
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dists[m++] = (c.points[i].v - c.points[j].v).norm();
        }
        std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
        double s = 0.0;
        for (int t = 0; t < k; ++t) s += dists[static_cast<size_t>(t)];
        mean_dist[i] = s / k;
    }

    double mu = 0.0;
    for (double d : mean_dist) mu += d;
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (double d : mean_dist) var += (d - mu) * (d - mu);
    const double sigma = std::sqrt(var / static_cast<double>(n));
    const double cutoff = mu + mult * sigma;

    PointCloud out;
    out.frame = c.frame;
    for (size_t i = 0; i < n; ++i)
        if (mean_dist[i] <= cutoff) out.points.push_back(c.points[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Detection lifting and plane projection
// ---------------------------------------------------------------------------

// Gather camera-frame cloud points whose pinhole projection lands inside
// the bbox (edges inclusive) with z > 0, take the median of their depths,
// and back-project the bbox center at that depth. Empty frustum yields
// nullopt so the caller decides the fallback. Median of an even count is
// the average of the two middle depths.
inline std::optional<Point3> lift_detection(const Detection& d, const CameraModel& cam,
                                            const PointCloud& c) {
    d.validate();
    cam.validate();

    std::vector<double> depths;
    for (const auto& p : c.points) {
        if (p.frame != Frame::Camera)
            throw contract_error("lift_detection expects a camera-frame cloud");
        if (!(p.z() > 0.0)) continue;
        const double u = cam.fx * p.x() / p.z() + cam.cx;
        const double v = cam.fy * p.y() / p.z() + cam.cy;
        if (u >= d.left && u <= d.left + d.width && v >= d.top && v <= d.top + d.height)
            depths.push_back(p.z());
    }
    if (depths.empty()) return std::nullopt;

    std::sort(depths.begin(), depths.end());
    const size_t n = depths.size();
    const double depth =
        (n % 2 == 1) ? depths[n / 2] : 0.5 * (depths[n / 2 - 1] + depths[n / 2]);

    const Point3 cam_pt = camera_point((d.center_u() - cam.cx) / cam.fx * depth,
                                       (d.center_v() - cam.cy) / cam.fy * depth, depth);
    return cam.cam_to_world.apply(cam_pt);
}

// Orthogonal projection onto the plane, expressed in its deterministic
// in-plane basis. Pairwise distances never increase.
inline Point2 project_to_plane(const Point3& p, const ProjectionPlane& plane) {
    if (p.frame != Frame::World) throw contract_error("project_to_plane expects a world point");
    Vec3 e1, e2;
    plane.basis(e1, e2);
    const Vec3 origin = plane.normal * plane.offset_mm;
    const Vec3 in_plane = p.v - plane.normal * (plane.normal.dot(p.v) - plane.offset_mm);
    const Vec3 rel = in_plane - origin;
    return {e1.dot(rel), e2.dot(rel)};
}

} // namespace lasermot::cloud
