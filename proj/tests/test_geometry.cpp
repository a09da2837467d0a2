#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "lasermot/calibration.hpp"
#include "lasermot/geometry.hpp"
#include "lasermot/io.hpp"
#include "lasermot/synth.hpp"
#include "support/oracles.hpp"

using namespace lasermot;
using namespace lasermot::geometry;

namespace {
constexpr double kPi = 3.14159265358979323846;

double max_abs_diff(const Mat3& a, const Mat3& b) {
    double m = 0.0;
    for (int i = 0; i < 9; ++i)
        m = std::max(m, std::abs(a.m[static_cast<size_t>(i)] - b.m[static_cast<size_t>(i)]));
    return m;
}
} // namespace

TEST_CASE("quat_to_matrix hand cases") {
    const Mat3 id = quat_to_matrix(Quaternion(1, 0, 0, 0)).matrix();
    CHECK(max_abs_diff(id, Mat3::identity()) == 0.0);

    const double s = std::sqrt(0.5);
    const Mat3 rz = quat_to_matrix(Quaternion(s, 0, 0, s)).matrix();
    const Mat3 rz_expected{{0, -1, 0, 1, 0, 0, 0, 0, 1}};
    CHECK(max_abs_diff(rz, rz_expected) < 1e-15);

    const Mat3 rx = quat_to_matrix(Quaternion(0, 1, 0, 0)).matrix();
    const Mat3 rx_expected{{1, 0, 0, 0, -1, 0, 0, 0, -1}};
    CHECK(max_abs_diff(rx, rx_expected) == 0.0);
}

TEST_CASE("rotations from random quaternions are orthonormal with det 1") {
    synth::SplitMix64 rng(101);
    for (int i = 0; i < 1000; ++i) {
        const Quaternion q = oracle::random_quaternion(rng);
        const Mat3 m = quat_to_matrix(q).matrix();
        CHECK(max_abs_diff(m.transposed() * m, Mat3::identity()) < 1e-12);
        CHECK(std::abs(m.det() - 1.0) < 1e-12);
    }
}

TEST_CASE("quaternion double cover is exact") {
    synth::SplitMix64 rng(102);
    for (int i = 0; i < 100; ++i) {
        const Quaternion q = oracle::random_quaternion(rng);
        const Mat3 a = quat_to_matrix(q).matrix();
        const Mat3 b = quat_to_matrix(q.negated()).matrix();
        CHECK(a.m == b.m);  // bitwise: every entry is a product of two components
    }
}

TEST_CASE("matrix_to_quat inverts quat_to_matrix") {
    synth::SplitMix64 rng(103);
    for (int i = 0; i < 200; ++i) {
        const Quaternion q = oracle::random_quaternion(rng).canonical();
        const Quaternion r = matrix_to_quat(quat_to_matrix(q));
        CHECK(std::abs(q.w() - r.w()) < 1e-12);
        CHECK(std::abs(q.x() - r.x()) < 1e-12);
        CHECK(std::abs(q.y() - r.y()) < 1e-12);
        CHECK(std::abs(q.z() - r.z()) < 1e-12);
    }
}

TEST_CASE("galvo_project hand cases") {
    const GalvoModel m(10.0);
    const Point3 boresight = galvo_project(m, GalvoAngles(0.0, 0.0), 123.0);
    CHECK(boresight.x() == 0.0);
    CHECK(boresight.y() == 0.0);
    CHECK(boresight.z() == 123.0);
    CHECK(boresight.frame == Frame::Projector);

    const Point3 a45 = galvo_project(m, GalvoAngles(kPi / 4, 0.0), 100.0);
    CHECK(a45.x() == Catch::Approx(110.0).margin(1e-12));
    CHECK(a45.y() == Catch::Approx(0.0).margin(1e-12));
    CHECK(a45.z() == 100.0);

    const Point3 b45 = galvo_project(m, GalvoAngles(0.0, kPi / 4), 100.0);
    CHECK(b45.x() == Catch::Approx(0.0).margin(1e-12));
    CHECK(b45.y() == Catch::Approx(100.0).margin(1e-12));
    CHECK(b45.z() == 100.0);
}

TEST_CASE("galvo domain errors") {
    const GalvoModel m(10.0);
    CHECK_THROWS_AS(GalvoAngles(kPi / 2, 0.0), degenerate_error);
    CHECK_THROWS_AS(GalvoAngles(0.0, -kPi / 2), degenerate_error);
    CHECK_THROWS_AS(galvo_project(m, GalvoAngles(0, 0), 0.0), degenerate_error);
    CHECK_THROWS_AS(galvo_invert(m, projector_point(0, 0, -1)), degenerate_error);
    CHECK_THROWS_AS(galvo_invert(m, world_point(0, 0, 10)), contract_error);
    CHECK_THROWS_AS(GalvoModel(0.0), contract_error);
}

TEST_CASE("galvo_invert reverses the hand case") {
    const GalvoModel m(10.0);
    const GalvoAngles a = galvo_invert(m, projector_point(110.0, 0.0, 100.0));
    CHECK(a.a == Catch::Approx(kPi / 4).margin(1e-12));
    CHECK(a.b == Catch::Approx(0.0).margin(1e-12));

    const GalvoAngles origin = galvo_invert(m, projector_point(0, 0, 100));
    CHECK(origin.a == 0.0);
    CHECK(origin.b == 0.0);
}

TEST_CASE("galvo project/invert round-trip over the working envelope") {
    synth::SplitMix64 rng(104);
    const double limit = 60.0 * kPi / 180.0;
    for (int i = 0; i < 2000; ++i) {
        const GalvoModel m(rng.uniform(1.0, 100.0));
        const GalvoAngles angles(rng.uniform(-limit, limit), rng.uniform(-limit, limit));
        const double phi = rng.uniform(100.0, 5000.0);
        const Point3 p = galvo_project(m, angles, phi);
        const GalvoAngles back = galvo_invert(m, p);
        CHECK(std::abs(back.a - angles.a) < 1e-9);
        CHECK(std::abs(back.b - angles.b) < 1e-9);
        const Point3 again = galvo_project(m, back, p.z());
        CHECK(std::abs(again.x() - p.x()) < 1e-9);
        CHECK(std::abs(again.y() - p.y()) < 1e-9);
    }
}

TEST_CASE("rigid transform apply and invert") {
    const RigidTransform id = RigidTransform::identity(Frame::World, Frame::Projector);
    const Point3 p = world_point(1, 2, 3);
    const Point3 q = id.apply(p);
    CHECK(q.v.x == 1.0);
    CHECK(q.frame == Frame::Projector);

    RigidTransform shift = id;
    shift.translation = {5, 0, 0};
    const Point3 shifted = shift.apply(p);
    CHECK(shifted.v.x == 6.0);
    CHECK(shifted.v.y == 2.0);
    CHECK(shifted.v.z == 3.0);

    const double s = std::sqrt(0.5);
    RigidTransform rot{quat_to_matrix(Quaternion(s, 0, 0, s)), Vec3{}, Frame::World,
                       Frame::Projector};
    const Point3 rotated = rot.apply(world_point(1, 0, 0));
    CHECK(rotated.v.x == Catch::Approx(0.0).margin(1e-15));
    CHECK(rotated.v.y == Catch::Approx(1.0).margin(1e-15));

    CHECK_THROWS_AS(rot.apply(projector_point(1, 0, 0)), contract_error);

    // Inverse of a pure translation is the negated translation.
    const RigidTransform inv = shift.inverse();
    CHECK(inv.translation.x == -5.0);
    CHECK(inv.src == Frame::Projector);
    CHECK(inv.dst == Frame::World);

    synth::SplitMix64 rng(105);
    for (int i = 0; i < 100; ++i) {
        const RigidTransform t{quat_to_matrix(oracle::random_quaternion(rng)),
                               oracle::random_vec(rng, -500.0, 500.0), Frame::World,
                               Frame::Projector};
        const RigidTransform tinv = t.inverse();
        const Point3 x = world_point(rng.uniform(-1000, 1000), rng.uniform(-1000, 1000),
                                     rng.uniform(-1000, 1000));
        const Point3 back = tinv.apply(t.apply(x));
        CHECK((back.v - x.v).norm() < 1e-9);
        CHECK(back.frame == Frame::World);
    }
}

TEST_CASE("jacobi_eigen solves small symmetric systems") {
    synth::SplitMix64 rng(106);
    for (int trial = 0; trial < 50; ++trial) {
        std::array<double, 16> a{};
        for (int r = 0; r < 4; ++r)
            for (int c = r; c < 4; ++c) {
                const double v = rng.uniform(-5.0, 5.0);
                a[static_cast<size_t>(4 * r + c)] = v;
                a[static_cast<size_t>(4 * c + r)] = v;
            }
        const auto e = jacobi_eigen<4>(a);
        for (int k = 0; k < 4; ++k) {
            if (k > 0) CHECK(e.values[static_cast<size_t>(k - 1)] >= e.values[static_cast<size_t>(k)]);
            // residual ||A v - lambda v||
            for (int r = 0; r < 4; ++r) {
                double av = 0.0;
                for (int c = 0; c < 4; ++c)
                    av += a[static_cast<size_t>(4 * r + c)] *
                          e.vectors[static_cast<size_t>(k)][static_cast<size_t>(c)];
                CHECK(std::abs(av - e.values[static_cast<size_t>(k)] *
                                        e.vectors[static_cast<size_t>(k)][static_cast<size_t>(r)]) <
                      1e-10);
            }
        }
    }
}

TEST_CASE("absolute orientation on identical point sets is the identity") {
    std::vector<std::pair<Point3, Point3>> pairs;
    const Vec3 pts[4] = {{0, 0, 0}, {100, 0, 0}, {0, 100, 0}, {30, 40, 120}};
    for (const auto& p : pts) pairs.emplace_back(Point3{p, Frame::World}, Point3{p, Frame::Projector});
    const auto sol = solve_absolute_orientation(pairs);
    CHECK(sol.rms_residual_mm < 1e-12);
    CHECK(max_abs_diff(sol.transform.rotation.matrix(), Mat3::identity()) < 1e-12);
    CHECK(sol.transform.translation.norm() < 1e-12);
}

TEST_CASE("absolute orientation recovers synthetic transforms exactly") {
    synth::SplitMix64 rng(107);
    for (int trial = 0; trial < 50; ++trial) {
        const Quaternion q = oracle::random_quaternion(rng);
        const RigidTransform truth{quat_to_matrix(q), oracle::random_vec(rng, -800.0, 800.0),
                                   Frame::World, Frame::Projector};
        std::vector<std::pair<Point3, Point3>> pairs;
        for (int i = 0; i < 10; ++i) {
            const Point3 w{oracle::random_vec(rng, -1000.0, 1000.0), Frame::World};
            pairs.emplace_back(w, truth.apply(w));
        }
        const auto sol = solve_absolute_orientation(pairs);
        CHECK(sol.rms_residual_mm < 1e-9);
        for (const auto& [w, p] : pairs)
            CHECK((sol.transform.apply(w).v - p.v).norm() < 1e-9);
    }
}

TEST_CASE("absolute orientation under 0.1 mm noise stays within 0.3 mm rms") {
    synth::SplitMix64 rng(108);
    int ok = 0;
    const int trials = 60;
    for (int trial = 0; trial < trials; ++trial) {
        const RigidTransform truth{quat_to_matrix(oracle::random_quaternion(rng)),
                                   oracle::random_vec(rng, -800.0, 800.0), Frame::World,
                                   Frame::Projector};
        std::vector<std::pair<Point3, Point3>> pairs;
        for (int i = 0; i < 10; ++i) {
            const Point3 w{oracle::random_vec(rng, -1000.0, 1000.0), Frame::World};
            Point3 p = truth.apply(w);
            p.v = p.v + Vec3{rng.gaussian(), rng.gaussian(), rng.gaussian()} * 0.1;
            pairs.emplace_back(w, p);
        }
        if (solve_absolute_orientation(pairs).rms_residual_mm <= 0.3) ++ok;
    }
    CHECK(ok >= (trials * 95) / 100);
}

TEST_CASE("absolute orientation is invariant to pair order") {
    synth::SplitMix64 rng(109);
    const RigidTransform truth{quat_to_matrix(oracle::random_quaternion(rng)),
                               oracle::random_vec(rng, -100.0, 100.0), Frame::World,
                               Frame::Projector};
    std::vector<std::pair<Point3, Point3>> pairs;
    for (int i = 0; i < 8; ++i) {
        const Point3 w{oracle::random_vec(rng, -500.0, 500.0), Frame::World};
        pairs.emplace_back(w, truth.apply(w));
    }
    const auto a = solve_absolute_orientation(pairs);
    std::reverse(pairs.begin(), pairs.end());
    std::swap(pairs[0], pairs[3]);
    const auto b = solve_absolute_orientation(pairs);
    CHECK(max_abs_diff(a.transform.rotation.matrix(), b.transform.rotation.matrix()) < 1e-9);
    CHECK((a.transform.translation - b.transform.translation).norm() < 1e-9);
}

TEST_CASE("absolute orientation rejects degenerate input") {
    std::vector<std::pair<Point3, Point3>> two = {
        {world_point(0, 0, 0), projector_point(0, 0, 0)},
        {world_point(1, 0, 0), projector_point(1, 0, 0)}};
    CHECK_THROWS_AS(solve_absolute_orientation(two), degenerate_error);

    std::vector<std::pair<Point3, Point3>> collinear;
    for (int i = 0; i < 5; ++i)
        collinear.emplace_back(world_point(i * 10.0, i * 20.0, i * 30.0),
                               projector_point(i * 10.0, i * 20.0, i * 30.0));
    CHECK_THROWS_AS(solve_absolute_orientation(collinear), degenerate_error);
}

TEST_CASE("load_calibration_points parses the published fixture exactly") {
    const auto points =
        load_calibration_points(read_text_file(std::string(LASERMOT_DATA_DIR) +
                                               "/table1_calibration_points.csv"));
    REQUIRE(points.size() == 7);
    CHECK(points[0].label == "投影架标定点1");
    CHECK(points[0].position.x == -260.44);
    CHECK(points[0].position.y == 312.64);
    CHECK(points[0].position.z == 12.64);
    CHECK(points[6].label == "承接部件基准点4");
    CHECK(points[6].position.x == -207.86);
    CHECK(points[6].position.y == 502.67);
    CHECK(points[6].position.z == 10.02);
}

TEST_CASE("load_calibration_points edge cases") {
    CHECK(load_calibration_points(std::string{}).empty());
    try {
        load_calibration_points(std::string("a,1,2,3\nb,1,x,3\n"));
        FAIL("expected format_error");
    } catch (const format_error& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(load_calibration_points(std::string("a,1,2\n")), format_error);
}

TEST_CASE("calibration JSON document round-trips") {
    CalibrationDoc doc;
    doc.quaternion = Quaternion(0.9, 0.1, -0.2, 0.3);
    doc.translation = {12.5, -3.25, 800.0};
    doc.mirror_separation_mm = 42.0;
    doc.rms_residual_mm = 0.125;
    doc.has_camera = true;
    doc.camera.fx = 1000;
    doc.camera.fy = 990;
    doc.camera.cx = 640;
    doc.camera.cy = 360;
    doc.camera.image_width = 1280;
    doc.camera.image_height = 720;
    const double s = std::sqrt(0.5);
    doc.camera.cam_to_world = {quat_to_matrix(Quaternion(s, -s, 0, 0)), Vec3{0, 0, 1200},
                               Frame::Camera, Frame::World};

    const auto parsed = parse_calibration(to_json(doc).dump());
    CHECK(parsed.mirror_separation_mm == 42.0);
    CHECK(parsed.rms_residual_mm == 0.125);
    CHECK(std::abs(parsed.quaternion.w() - doc.quaternion.w()) < 1e-15);
    CHECK((parsed.translation - doc.translation).norm() == 0.0);
    REQUIRE(parsed.has_camera);
    CHECK(parsed.camera.fy == 990.0);
    CHECK(max_abs_diff(parsed.camera.cam_to_world.rotation.matrix(),
                       doc.camera.cam_to_world.rotation.matrix()) < 1e-12);

    CHECK_THROWS_AS(parse_calibration("{not json"), format_error);
    CHECK_THROWS_AS(parse_calibration("{\"quaternion\": [1,0,0]}"), format_error);
}
