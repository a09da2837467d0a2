#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "lasermot/error.hpp"
#include "lasermot/types.hpp"

namespace lasermot::geometry {

// ---------------------------------------------------------------------------
// Quaternion and rotation
// ---------------------------------------------------------------------------

// Unit quaternion; normalized on construction. w is the real part.
class Quaternion {
public:
    Quaternion() = default;

    Quaternion(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) {
        const double n = std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_);
        if (n == 0.0 || !std::isfinite(n))
            throw contract_error("quaternion must have nonzero finite norm");
        w_ /= n;
        x_ /= n;
        y_ /= n;
        z_ /= n;
    }

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }

    Quaternion negated() const {
        Quaternion q;
        q.w_ = -w_;
        q.x_ = -x_;
        q.y_ = -y_;
        q.z_ = -z_;
        return q;
    }

    // Canonical hemisphere: non-negative real part, first nonzero
    // imaginary component positive when the real part is zero.
    Quaternion canonical() const {
        if (w_ < 0.0) return negated();
        if (w_ == 0.0) {
            for (double c : {x_, y_, z_}) {
                if (c < 0.0) return negated();
                if (c > 0.0) break;
            }
        }
        return *this;
    }

private:
    double w_ = 1.0, x_ = 0.0, y_ = 0.0, z_ = 0.0;
};

// Proper rotation matrix. Construction validates orthonormality and det = 1.
class Rotation {
public:
    Rotation() : m_(Mat3::identity()) {}

    explicit Rotation(const Mat3& m) : m_(m) {
        const Mat3 g = m.transposed() * m;
        const Mat3 id = Mat3::identity();
        for (int i = 0; i < 9; ++i)
            if (std::abs(g.m[static_cast<size_t>(i)] - id.m[static_cast<size_t>(i)]) > 1e-9)
                throw contract_error("matrix is not orthonormal");
        if (std::abs(m.det() - 1.0) > 1e-9)
            throw contract_error("matrix is not a proper rotation (det != 1)");
    }

    const Mat3& matrix() const { return m_; }
    Vec3 operator*(const Vec3& v) const { return m_ * v; }
    Rotation inverse() const { return Rotation(m_.transposed()); }

private:
    Mat3 m_;
};

inline Rotation quat_to_matrix(const Quaternion& q) {
    const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
    Mat3 m;
    m(0, 0) = w * w + x * x - y * y - z * z;
    m(0, 1) = 2.0 * (x * y - w * z);
    m(0, 2) = 2.0 * (x * z + w * y);
    m(1, 0) = 2.0 * (x * y + w * z);
    m(1, 1) = w * w - x * x + y * y - z * z;
    m(1, 2) = 2.0 * (y * z - w * x);
    m(2, 0) = 2.0 * (x * z - w * y);
    m(2, 1) = 2.0 * (y * z + w * x);
    m(2, 2) = w * w - x * x - y * y + z * z;
    return Rotation(m);
}

// Recover a unit quaternion from a rotation matrix (Shepperd's branch
// selection keeps the extraction well conditioned).
inline Quaternion matrix_to_quat(const Rotation& r) {
    const Mat3& m = r.matrix();
    const double tr = m(0, 0) + m(1, 1) + m(2, 2);
    double w, x, y, z;
    if (tr > 0.0) {
        const double s = std::sqrt(tr + 1.0) * 2.0;
        w = 0.25 * s;
        x = (m(2, 1) - m(1, 2)) / s;
        y = (m(0, 2) - m(2, 0)) / s;
        z = (m(1, 0) - m(0, 1)) / s;
    } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
        const double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
        w = (m(2, 1) - m(1, 2)) / s;
        x = 0.25 * s;
        y = (m(0, 1) + m(1, 0)) / s;
        z = (m(0, 2) + m(2, 0)) / s;
    } else if (m(1, 1) > m(2, 2)) {
        const double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
        w = (m(0, 2) - m(2, 0)) / s;
        x = (m(0, 1) + m(1, 0)) / s;
        y = 0.25 * s;
        z = (m(1, 2) + m(2, 1)) / s;
    } else {
        const double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
        w = (m(1, 0) - m(0, 1)) / s;
        x = (m(0, 2) + m(2, 0)) / s;
        y = (m(1, 2) + m(2, 1)) / s;
        z = 0.25 * s;
    }
    return Quaternion(w, x, y, z).canonical();
}

// ---------------------------------------------------------------------------
// Rigid transform between tagged frames
// ---------------------------------------------------------------------------

struct RigidTransform {
    Rotation rotation;
    Vec3 translation;
    Frame src = Frame::World;
    Frame dst = Frame::Projector;

    static RigidTransform identity(Frame src, Frame dst) {
        return {Rotation(), Vec3{}, src, dst};
    }

    Point3 apply(const Point3& p) const {
        if (p.frame != src)
            throw contract_error("transform expects a " + frame_name(src) + " point, got " +
                                 frame_name(p.frame));
        return {rotation * p.v + translation, dst};
    }

    RigidTransform inverse() const {
        const Rotation rinv = rotation.inverse();
        return {rinv, -(rinv * translation), dst, src};
    }
};

// ---------------------------------------------------------------------------
// Galvanometer projection model
// ---------------------------------------------------------------------------

// Two orthogonal steerable mirrors separated by e millimeters.
struct GalvoModel {
    double e;

    explicit GalvoModel(double separation_mm) : e(separation_mm) {
        if (!(e > 0.0)) throw contract_error("mirror separation must be positive");
    }
};

// Horizontal angle A and pitch angle B, radians, each strictly inside
// (-pi/2, pi/2).
struct GalvoAngles {
    double a;
    double b;

    GalvoAngles(double horizontal, double pitch) : a(horizontal), b(pitch) {
        constexpr double half_pi = 1.57079632679489661923;
        if (!(std::abs(a) < half_pi) || !(std::abs(b) < half_pi))
            throw degenerate_error("galvo angle magnitude must be below pi/2");
    }
};

// Mirror angles + target plane distance -> projector-frame point:
//   x' = e tanA + phi tanA / cosB,  y' = phi tanB,  z' = phi.
inline Point3 galvo_project(const GalvoModel& m, const GalvoAngles& a, double phi) {
    if (!(phi > 0.0)) throw degenerate_error("target distance phi must be positive");
    const double tan_a = std::tan(a.a);
    const double tan_b = std::tan(a.b);
    const double cos_b = std::cos(a.b);
    return projector_point(m.e * tan_a + phi * tan_a / cos_b, phi * tan_b, phi);
}

// Closed-form inverse: B = atan(y'/z'), A = atan(x' / (e + z'/cosB)).
inline GalvoAngles galvo_invert(const GalvoModel& m, const Point3& p) {
    if (p.frame != Frame::Projector)
        throw contract_error("galvo_invert expects a projector-frame point");
    if (!(p.z() > 0.0)) throw degenerate_error("galvo_invert requires z' > 0");
    const double b = std::atan(p.y() / p.z());
    const double a = std::atan(p.x() / (m.e + p.z() / std::cos(b)));
    return {a, b};
}

// ---------------------------------------------------------------------------
// Small symmetric eigensolver (cyclic Jacobi)
// ---------------------------------------------------------------------------

template <int N>
struct SymEigen {
    std::array<double, N> values;                  // descending
    std::array<std::array<double, N>, N> vectors;  // vectors[k] pairs with values[k]
};

// Cyclic Jacobi rotations on a symmetric matrix, iterated until the
// off-diagonal Frobenius norm falls below 1e-14 relative to the matrix
// norm. Deterministic and sufficient for the 3x3/4x4 problems here.
template <int N>
SymEigen<N> jacobi_eigen(std::array<double, N * N> a) {
    auto at = [&a](int r, int c) -> double& { return a[static_cast<size_t>(N * r + c)]; };

    std::array<std::array<double, N>, N> v{};
    for (int i = 0; i < N; ++i) v[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1.0;

    double frob = 0.0;
    for (double e : a) frob += e * e;
    const double stop = 1e-14 * std::max(1.0, std::sqrt(frob));

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) off += 2.0 * at(p, q) * at(p, q);
        if (std::sqrt(off) < stop) break;

        for (int p = 0; p < N; ++p) {
            for (int q = p + 1; q < N; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < N; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < N; ++k) {
                    auto& vk = v[static_cast<size_t>(k)];
                    const double vkp = vk[static_cast<size_t>(p)], vkq = vk[static_cast<size_t>(q)];
                    vk[static_cast<size_t>(p)] = c * vkp - s * vkq;
                    vk[static_cast<size_t>(q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    SymEigen<N> out{};
    std::array<int, N> order{};
    for (int i = 0; i < N; ++i) order[static_cast<size_t>(i)] = i;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (at(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]) >
                at(order[static_cast<size_t>(i)], order[static_cast<size_t>(i)]))
                std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);

    for (int i = 0; i < N; ++i) {
        const int k = order[static_cast<size_t>(i)];
        out.values[static_cast<size_t>(i)] = at(k, k);
        for (int r = 0; r < N; ++r)
            out.vectors[static_cast<size_t>(i)][static_cast<size_t>(r)] =
                v[static_cast<size_t>(r)][static_cast<size_t>(k)];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Absolute orientation (quaternion method)
// ---------------------------------------------------------------------------

struct OrientationSolution {
    RigidTransform transform;  // world -> projector
    Quaternion quaternion;
    double rms_residual_mm = 0.0;
};

// Least-squares rigid transform mapping world points onto projector
// points: centroid subtraction, 3x3 cross-covariance, Horn's 4x4
// symmetric matrix, maximal-eigenvalue eigenvector as the quaternion.
inline OrientationSolution solve_absolute_orientation(
    const std::vector<std::pair<Point3, Point3>>& pairs) {
    const size_t n = pairs.size();
    if (n < 3) throw degenerate_error("absolute orientation needs at least 3 point pairs");
    for (const auto& [w, p] : pairs) {
        if (w.frame != Frame::World || p.frame != Frame::Projector)
            throw contract_error("pairs must be (world, projector) points");
    }

    Vec3 cw{}, cp{};
    for (const auto& [w, p] : pairs) {
        cw = cw + w.v;
        cp = cp + p.v;
    }
    cw = cw / static_cast<double>(n);
    cp = cp / static_cast<double>(n);

    // Collinearity check on the centered world scatter: the two largest
    // eigenvalues must both carry signal.
    std::array<double, 9> scatter{};
    for (const auto& [w, p] : pairs) {
        const Vec3 d = w.v - cw;
        const std::array<double, 3> c{d.x, d.y, d.z};
        for (int r = 0; r < 3; ++r)
            for (int col = 0; col < 3; ++col)
                scatter[static_cast<size_t>(3 * r + col)] +=
                    c[static_cast<size_t>(r)] * c[static_cast<size_t>(col)];
    }
    const auto se = jacobi_eigen<3>(scatter);
    if (!(se.values[1] > 1e-12 * std::max(se.values[0], 1e-300)))
        throw degenerate_error("world calibration points are collinear");

    double sxx = 0, sxy = 0, sxz = 0, syx = 0, syy = 0, syz = 0, szx = 0, szy = 0, szz = 0;
    for (const auto& [w, p] : pairs) {
        const Vec3 a = w.v - cw;
        const Vec3 b = p.v - cp;
        sxx += a.x * b.x;
        sxy += a.x * b.y;
        sxz += a.x * b.z;
        syx += a.y * b.x;
        syy += a.y * b.y;
        syz += a.y * b.z;
        szx += a.z * b.x;
        szy += a.z * b.y;
        szz += a.z * b.z;
    }

    const std::array<double, 16> horn{
        sxx + syy + szz, syz - szy,       szx - sxz,        sxy - syx,
        syz - szy,       sxx - syy - szz, sxy + syx,        szx + sxz,
        szx - sxz,       sxy + syx,       syy - sxx - szz,  syz + szy,
        sxy - syx,       szx + sxz,       syz + szy,        szz - sxx - syy};

    const auto he = jacobi_eigen<4>(horn);
    const auto& top = he.vectors[0];
    const Quaternion q = Quaternion(top[0], top[1], top[2], top[3]).canonical();

    const Rotation rot = quat_to_matrix(q);
    const Vec3 t = cp - rot * cw;

    double sq = 0.0;
    for (const auto& [w, p] : pairs) sq += (rot * w.v + t - p.v).squared_norm();

    OrientationSolution sol;
    sol.transform = {rot, t, Frame::World, Frame::Projector};
    sol.quaternion = q;
    sol.rms_residual_mm = std::sqrt(sq / static_cast<double>(n));
    return sol;
}

} // namespace lasermot::geometry
