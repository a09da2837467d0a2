#pragma once

#include <array>
#include <cmath>
#include <string>

#include "lasermot/error.hpp"

namespace lasermot {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }

    Vec3 normalized() const {
        const double n = norm();
        if (n == 0.0) throw contract_error("cannot normalize zero vector");
        return *this / n;
    }

    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
    Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
    Point2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
};

inline double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }

// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m{};

    static Mat3 identity() { return {{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }

    double operator()(int r, int c) const { return m[static_cast<size_t>(3 * r + c)]; }
    double& operator()(int r, int c) { return m[static_cast<size_t>(3 * r + c)]; }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }

    Mat3 transposed() const {
        return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
    }

    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
};

// Which coordinate system a 3D point lives in. Transforms check tags at
// runtime so that loaded data cannot silently cross frames.
enum class Frame { World, Projector, Camera };

inline std::string frame_name(Frame f) {
    switch (f) {
        case Frame::World: return "world";
        case Frame::Projector: return "projector";
        case Frame::Camera: return "camera";
    }
    return "?";
}

struct Point3 {
    Vec3 v;
    Frame frame = Frame::World;

    double x() const { return v.x; }
    double y() const { return v.y; }
    double z() const { return v.z; }
};

inline Point3 world_point(double x, double y, double z) {
    return {{x, y, z}, Frame::World};
}
inline Point3 projector_point(double x, double y, double z) {
    return {{x, y, z}, Frame::Projector};
}
inline Point3 camera_point(double x, double y, double z) {
    return {{x, y, z}, Frame::Camera};
}

} // namespace lasermot
