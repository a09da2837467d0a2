#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lasermot/calibration.hpp"
#include "lasermot/cloud.hpp"
#include "lasermot/error.hpp"
#include "lasermot/mot_io.hpp"
#include "lasermot/types.hpp"

namespace lasermot::synth {

// splitmix64 (Steele, Lea & Flood): the fixed 64-bit mixing generator all
// synthetic data derives from, so a seed pins every output byte.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1]: 53 mantissa bits, never exactly zero.
    double uniform() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; the spare value is cached so draws stay paired.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Knuth's product-of-uniforms method; fine for the small rates here.
    int poisson(double rate) {
        if (rate <= 0.0) return 0;
        const double limit = std::exp(-rate);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Constant-velocity target: a world-axis-aligned box of the given full
// extent whose center moves linearly.
struct TargetSpec {
    Vec3 start_mm;
    Vec3 velocity_mm_per_frame;
    Vec3 extent_mm{600.0, 900.0, 400.0};
    int class_id = 0;
};

struct SceneSpec {
    std::uint64_t seed = 1;
    int n_frames = 0;
    std::vector<TargetSpec> targets;
    cloud::CameraModel camera;
    double dropout = 0.0;                 // probability a detection is dropped
    double position_noise_sigma_mm = 0.0; // detection center jitter, mm equivalent
    double clutter_rate = 0.0;            // expected false detections per frame
    int points_per_target = 32;

    void validate() const {
        camera.validate();
        if (n_frames < 0) throw contract_error("n_frames must be >= 0");
        if (dropout < 0.0 || dropout > 1.0) throw contract_error("dropout must be in [0,1]");
        if (position_noise_sigma_mm < 0.0) throw contract_error("noise sigma must be >= 0");
        if (clutter_rate < 0.0) throw contract_error("clutter rate must be >= 0");
        if (points_per_target < 20) throw contract_error("points_per_target must be >= 20");
        for (const auto& t : targets) {
            if (!(t.extent_mm.x > 0.0 && t.extent_mm.y > 0.0 && t.extent_mm.z > 0.0))
                throw contract_error("target extent must be positive");
            if (t.class_id < 0 || t.class_id >= static_cast<int>(cloud::class_names().size()))
                throw contract_error("target class_id out of range");
        }
    }
};

// Ground truth, detections, and per-frame camera-frame clouds for one
// sequence. Frames are 1-based.
struct Scene {
    std::vector<MotRow> ground_truth;
    std::vector<MotRow> detections;
    std::map<int, cloud::PointCloud> clouds;
};

// Deterministic scene synthesis. Each target carries a fixed antithetic
// point patch (offset pairs mirrored through the center), so the median
// patch depth equals the center depth exactly and the lifted position
// reproduces the true center. The detection box is centered on the exact
// center projection and sized to cover every patch point, then shifted by
// pixel-equivalent Gaussian noise when sigma > 0.
inline Scene gen_scene(const SceneSpec& spec) {
    spec.validate();
    Scene scene;
    SplitMix64 rng(spec.seed);

    const geometry::RigidTransform world_to_cam = spec.camera.cam_to_world.inverse();

    // Per-target surface patches, sampled once and reused every frame.
    const int pairs = (spec.points_per_target + 1) / 2;
    std::vector<std::vector<Vec3>> patch_offsets(spec.targets.size());
    for (size_t i = 0; i < spec.targets.size(); ++i) {
        const Vec3 half = spec.targets[i].extent_mm * 0.5;
        for (int k = 0; k < pairs; ++k) {
            const Vec3 off{rng.uniform(-half.x, half.x), rng.uniform(-half.y, half.y),
                           rng.uniform(-half.z, half.z)};
            patch_offsets[i].push_back(off);
            patch_offsets[i].push_back(-off);
        }
    }

    for (int frame = 1; frame <= spec.n_frames; ++frame) {
        cloud::PointCloud frame_cloud;
        frame_cloud.frame = frame;

        for (size_t i = 0; i < spec.targets.size(); ++i) {
            const TargetSpec& t = spec.targets[i];
            const Vec3 center =
                t.start_mm + t.velocity_mm_per_frame * static_cast<double>(frame - 1);
            const Point3 cam_center = world_to_cam.apply({center, Frame::World});
            if (!(cam_center.z() > 0.0))
                throw degenerate_error("target " + std::to_string(i + 1) + " behind camera at frame " +
                                       std::to_string(frame));

            // Patch into the cloud, tracking the projected spread.
            const double uc = spec.camera.fx * cam_center.x() / cam_center.z() + spec.camera.cx;
            const double vc = spec.camera.fy * cam_center.y() / cam_center.z() + spec.camera.cy;
            double half_w = 0.0, half_h = 0.0;
            for (const Vec3& off : patch_offsets[i]) {
                const Point3 cam_pt = world_to_cam.apply({center + off, Frame::World});
                if (!(cam_pt.z() > 0.0))
                    throw degenerate_error("target " + std::to_string(i + 1) +
                                           " crosses the camera plane at frame " +
                                           std::to_string(frame));
                frame_cloud.points.push_back(cam_pt);
                const double u = spec.camera.fx * cam_pt.x() / cam_pt.z() + spec.camera.cx;
                const double v = spec.camera.fy * cam_pt.y() / cam_pt.z() + spec.camera.cy;
                half_w = std::max(half_w, std::abs(u - uc));
                half_h = std::max(half_h, std::abs(v - vc));
            }
            half_w += 2.0;
            half_h += 2.0;

            MotRow gt;
            gt.frame = frame;
            gt.id = static_cast<int>(i) + 1;
            gt.left = uc - half_w;
            gt.top = vc - half_h;
            gt.width = 2.0 * half_w;
            gt.height = 2.0 * half_h;
            gt.confidence = 1.0;
            gt.class_id = t.class_id;
            gt.world = center;
            scene.ground_truth.push_back(gt);

            const bool dropped = spec.dropout > 0.0 && rng.uniform() <= spec.dropout;
            if (dropped) continue;

            double du = 0.0, dv = 0.0;
            if (spec.position_noise_sigma_mm > 0.0) {
                const double scale_u = spec.camera.fx / cam_center.z();
                const double scale_v = spec.camera.fy / cam_center.z();
                du = rng.gaussian() * spec.position_noise_sigma_mm * scale_u;
                dv = rng.gaussian() * spec.position_noise_sigma_mm * scale_v;
            }

            MotRow det = gt;
            det.id = -1;
            det.left += du;
            det.top += dv;
            det.confidence = 0.9;
            det.world.reset();
            scene.detections.push_back(det);
        }

        // Clutter: false detections with their own small cloud patches, so
        // they survive depth lifting like real detector mistakes would.
        const int n_clutter = spec.clutter_rate > 0.0 ? rng.poisson(spec.clutter_rate) : 0;
        for (int c = 0; c < n_clutter; ++c) {
            const double z = rng.uniform(3000.0, 9000.0);
            const double u = spec.camera.cx + rng.uniform(-500.0, 500.0);
            const double v = spec.camera.cy + rng.uniform(-200.0, 200.0);
            const Vec3 cam_pos{(u - spec.camera.cx) / spec.camera.fx * z,
                               (v - spec.camera.cy) / spec.camera.fy * z, z};
            for (int k = 0; k < 4; ++k) {
                const Vec3 off{rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0),
                               rng.uniform(-100.0, 100.0)};
                frame_cloud.points.push_back({cam_pos + off, Frame::Camera});
                frame_cloud.points.push_back({cam_pos - off, Frame::Camera});
            }
            MotRow det;
            det.frame = frame;
            det.id = -1;
            const double half = rng.uniform(15.0, 45.0);
            det.left = u - half;
            det.top = v - half;
            det.width = 2.0 * half;
            det.height = 2.0 * half;
            det.confidence = 0.5;
            det.class_id = static_cast<int>(rng.next() % cloud::class_names().size());
            scene.detections.push_back(det);
        }

        scene.clouds[frame] = std::move(frame_cloud);
    }
    return scene;
}

// A ready-made multi-target driving layout: forward-looking camera 1.2 m
// above the ground plane, one receding rank of targets. Lane spacing is
// kept above the box width in the constant ratio 1400:600, so detection
// boxes of different targets never overlap in the image and cloud patches
// never bleed into a neighbor's frustum.
inline SceneSpec demo_scene(int n_targets, int n_frames, std::uint64_t seed, double dropout = 0.0,
                            double noise_sigma_mm = 0.0, double clutter_rate = 0.0) {
    SceneSpec spec;
    spec.seed = seed;
    spec.n_frames = n_frames;
    spec.dropout = dropout;
    spec.position_noise_sigma_mm = noise_sigma_mm;
    spec.clutter_rate = clutter_rate;

    spec.camera.fx = 1000.0;
    spec.camera.fy = 1000.0;
    spec.camera.cx = 640.0;
    spec.camera.cy = 360.0;
    spec.camera.image_width = 1280;
    spec.camera.image_height = 720;
    const double s = std::sqrt(0.5);
    spec.camera.cam_to_world = {geometry::quat_to_matrix(geometry::Quaternion(s, -s, 0.0, 0.0)),
                                Vec3{0.0, 0.0, 1200.0}, Frame::Camera, Frame::World};

    for (int i = 0; i < n_targets; ++i) {
        TargetSpec t;
        t.start_mm = {(i - (n_targets - 1) / 2.0) * 1400.0, 11000.0 + 150.0 * i, 500.0};
        t.velocity_mm_per_frame = {0.0, 80.0 + 10.0 * (i % 3), 0.0};
        t.extent_mm = {600.0, 600.0, 400.0};
        t.class_id = i % static_cast<int>(cloud::class_names().size());
        spec.targets.push_back(t);
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Scene spec JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const SceneSpec& spec) {
    nlohmann::json targets = nlohmann::json::array();
    for (const auto& t : spec.targets)
        targets.push_back({{"start_mm", {t.start_mm.x, t.start_mm.y, t.start_mm.z}},
                           {"velocity_mm_per_frame",
                            {t.velocity_mm_per_frame.x, t.velocity_mm_per_frame.y,
                             t.velocity_mm_per_frame.z}},
                           {"extent_mm", {t.extent_mm.x, t.extent_mm.y, t.extent_mm.z}},
                           {"class_id", t.class_id}});
    return {{"seed", spec.seed},
            {"n_frames", spec.n_frames},
            {"dropout", spec.dropout},
            {"position_noise_sigma_mm", spec.position_noise_sigma_mm},
            {"clutter_rate", spec.clutter_rate},
            {"points_per_target", spec.points_per_target},
            {"camera", geometry::camera_to_json(spec.camera)},
            {"targets", targets}};
}

inline SceneSpec scene_spec_from_json(const nlohmann::json& j) {
    SceneSpec spec;
    try {
        spec.seed = j.at("seed").get<std::uint64_t>();
        spec.n_frames = j.at("n_frames").get<int>();
        spec.dropout = j.value("dropout", 0.0);
        spec.position_noise_sigma_mm = j.value("position_noise_sigma_mm", 0.0);
        spec.clutter_rate = j.value("clutter_rate", 0.0);
        spec.points_per_target = j.value("points_per_target", 32);
        spec.camera = geometry::camera_from_json(j.at("camera"));
        for (const auto& jt : j.at("targets")) {
            TargetSpec t;
            const auto& s = jt.at("start_mm");
            const auto& v = jt.at("velocity_mm_per_frame");
            t.start_mm = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
            t.velocity_mm_per_frame = {v.at(0).get<double>(), v.at(1).get<double>(),
                                       v.at(2).get<double>()};
            if (jt.contains("extent_mm")) {
                const auto& e = jt.at("extent_mm");
                t.extent_mm = {e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()};
            }
            t.class_id = jt.value("class_id", 0);
            spec.targets.push_back(t);
        }
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("scene spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

inline SceneSpec parse_scene_spec(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("scene spec JSON: ") + e.what());
    }
    return scene_spec_from_json(j);
}

} // namespace lasermot::synth
