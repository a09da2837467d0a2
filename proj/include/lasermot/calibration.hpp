#pragma once

#include <array>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lasermot/cloud.hpp"
#include "lasermot/error.hpp"
#include "lasermot/geometry.hpp"
#include "lasermot/types.hpp"

namespace lasermot::geometry {

struct LabeledPoint {
    std::string label;
    Vec3 position;  // mm
};

// CSV rows "label,x,y,z", millimeters. Labels may be any UTF-8 text
// without commas.
inline std::vector<LabeledPoint> load_calibration_points(std::istream& in) {
    std::vector<LabeledPoint> points;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        f.push_back(cur);
        if (f.size() != 4) throw format_error("expected 'label,x,y,z'", line_no);
        LabeledPoint p;
        p.label = f[0];
        try {
            size_t p1 = 0, p2 = 0, p3 = 0;
            p.position = {std::stod(f[1], &p1), std::stod(f[2], &p2), std::stod(f[3], &p3)};
            if (p1 != f[1].size() || p2 != f[2].size() || p3 != f[3].size())
                throw std::invalid_argument("trailing garbage");
        } catch (const std::exception&) {
            throw format_error("non-numeric coordinate", line_no);
        }
        points.push_back(std::move(p));
    }
    return points;
}

inline std::vector<LabeledPoint> load_calibration_points(const std::string& text) {
    std::istringstream in(text);
    return load_calibration_points(in);
}

// CSV rows "label,wx,wy,wz,px,py,pz": a world point and its projector-
// frame mate, used by the calibrate command.
inline std::vector<std::pair<Point3, Point3>> load_calibration_pairs(std::istream& in) {
    std::vector<std::pair<Point3, Point3>> pairs;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        f.push_back(cur);
        if (f.size() != 7) throw format_error("expected 'label,wx,wy,wz,px,py,pz'", line_no);
        try {
            std::array<double, 6> v{};
            for (int i = 0; i < 6; ++i) {
                size_t pos = 0;
                v[static_cast<size_t>(i)] = std::stod(f[static_cast<size_t>(i) + 1], &pos);
                if (pos != f[static_cast<size_t>(i) + 1].size())
                    throw std::invalid_argument("trailing garbage");
            }
            pairs.emplace_back(world_point(v[0], v[1], v[2]), projector_point(v[3], v[4], v[5]));
        } catch (const format_error&) {
            throw;
        } catch (const std::exception&) {
            throw format_error("non-numeric coordinate", line_no);
        }
    }
    return pairs;
}

// ---------------------------------------------------------------------------
// Calibration JSON document: the solved world->projector transform, the
// galvo mirror separation, and (optionally) the camera model.
// ---------------------------------------------------------------------------

struct CalibrationDoc {
    Quaternion quaternion;
    Vec3 translation;  // mm
    double mirror_separation_mm = 10.0;
    double rms_residual_mm = 0.0;
    bool has_camera = false;
    cloud::CameraModel camera;

    RigidTransform world_to_projector() const {
        return {quat_to_matrix(quaternion), translation, Frame::World, Frame::Projector};
    }
};

inline nlohmann::json camera_to_json(const cloud::CameraModel& cam) {
    const Quaternion q = matrix_to_quat(cam.cam_to_world.rotation);
    return {{"fx", cam.fx},
            {"fy", cam.fy},
            {"cx", cam.cx},
            {"cy", cam.cy},
            {"image_width", cam.image_width},
            {"image_height", cam.image_height},
            {"cam_to_world",
             {{"quaternion", {q.w(), q.x(), q.y(), q.z()}},
              {"translation_mm",
               {cam.cam_to_world.translation.x, cam.cam_to_world.translation.y,
                cam.cam_to_world.translation.z}}}}};
}

inline cloud::CameraModel camera_from_json(const nlohmann::json& j) {
    cloud::CameraModel cam;
    try {
        cam.fx = j.at("fx").get<double>();
        cam.fy = j.at("fy").get<double>();
        cam.cx = j.at("cx").get<double>();
        cam.cy = j.at("cy").get<double>();
        cam.image_width = j.value("image_width", 0);
        cam.image_height = j.value("image_height", 0);
        const auto& ext = j.at("cam_to_world");
        const auto& q = ext.at("quaternion");
        const auto& t = ext.at("translation_mm");
        cam.cam_to_world = {quat_to_matrix(Quaternion(q.at(0).get<double>(), q.at(1).get<double>(),
                                                      q.at(2).get<double>(), q.at(3).get<double>())),
                            Vec3{t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()},
                            Frame::Camera, Frame::World};
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("camera model: ") + e.what());
    }
    cam.validate();
    return cam;
}

inline nlohmann::json to_json(const CalibrationDoc& doc) {
    nlohmann::json j = {
        {"quaternion", {doc.quaternion.w(), doc.quaternion.x(), doc.quaternion.y(),
                        doc.quaternion.z()}},
        {"translation_mm", {doc.translation.x, doc.translation.y, doc.translation.z}},
        {"mirror_separation_mm", doc.mirror_separation_mm},
        {"rms_residual_mm", doc.rms_residual_mm}};
    if (doc.has_camera) j["camera"] = camera_to_json(doc.camera);
    return j;
}

inline CalibrationDoc calibration_from_json(const nlohmann::json& j) {
    CalibrationDoc doc;
    try {
        const auto& q = j.at("quaternion");
        doc.quaternion = Quaternion(q.at(0).get<double>(), q.at(1).get<double>(),
                                    q.at(2).get<double>(), q.at(3).get<double>());
        const auto& t = j.at("translation_mm");
        doc.translation = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
        doc.mirror_separation_mm = j.value("mirror_separation_mm", 10.0);
        doc.rms_residual_mm = j.value("rms_residual_mm", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("calibration document: ") + e.what());
    }
    if (j.contains("camera")) {
        doc.camera = camera_from_json(j.at("camera"));
        doc.has_camera = true;
    }
    return doc;
}

inline CalibrationDoc parse_calibration(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("calibration JSON: ") + e.what());
    }
    return calibration_from_json(j);
}

} // namespace lasermot::geometry
