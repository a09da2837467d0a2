#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "lasermot/calibration.hpp"
#include "lasermot/cloud.hpp"
#include "lasermot/error.hpp"
#include "lasermot/tracker.hpp"

namespace lasermot {

// Tracking run configuration. Relative paths resolve against the
// directory holding the config file.
struct RunConfig {
    std::filesystem::path detections;
    std::filesystem::path clouds_dir;
    std::filesystem::path calibration;
    std::filesystem::path out_dir;
    tracker::AssocParams assoc;
    cloud::ProjectionPlane plane;
    double metric_threshold_mm = 1000.0;
    int denoise_k = 0;  // 0 disables statistical denoising
    double denoise_mult = 2.0;
};

inline RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("run config JSON: ") + e.what());
    }

    RunConfig cfg;
    try {
        auto resolve = [&](const std::string& p) {
            const std::filesystem::path path(p);
            return path.is_absolute() ? path : base_dir / path;
        };
        cfg.detections = resolve(j.at("detections").get<std::string>());
        cfg.clouds_dir = resolve(j.at("clouds_dir").get<std::string>());
        cfg.calibration = resolve(j.at("calibration").get<std::string>());
        cfg.out_dir = resolve(j.at("out_dir").get<std::string>());
        if (j.contains("assoc")) {
            const auto& a = j.at("assoc");
            cfg.assoc.gate_mm = a.value("gate_mm", cfg.assoc.gate_mm);
            cfg.assoc.min_hits = a.value("min_hits", cfg.assoc.min_hits);
            cfg.assoc.max_misses = a.value("max_misses", cfg.assoc.max_misses);
        }
        if (j.contains("plane")) {
            const auto& p = j.at("plane");
            const auto& n = p.at("normal");
            cfg.plane = cloud::ProjectionPlane(
                Vec3{n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>()},
                p.value("offset_mm", 0.0));
        }
        cfg.metric_threshold_mm = j.value("metric_threshold_mm", cfg.metric_threshold_mm);
        if (j.contains("denoise")) {
            const auto& d = j.at("denoise");
            cfg.denoise_k = d.value("k", 8);
            cfg.denoise_mult = d.value("mult", 2.0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("run config: ") + e.what());
    }
    cfg.assoc.validate();
    return cfg;
}

} // namespace lasermot
