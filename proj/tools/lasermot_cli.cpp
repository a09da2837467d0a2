// lasermot command-line front end: image enhancement, extrinsic
// calibration, detection-to-track pipeline, MOTA scoring, trajectory
// plots, and synthetic scene generation.
//
// Exit codes: 0 success, 2 input/IO error, 3 domain/degenerate error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lasermot/calibration.hpp"
#include "lasermot/cloud.hpp"
#include "lasermot/error.hpp"
#include "lasermot/geometry.hpp"
#include "lasermot/image.hpp"
#include "lasermot/io.hpp"
#include "lasermot/metrics.hpp"
#include "lasermot/mot_io.hpp"
#include "lasermot/retinex.hpp"
#include "lasermot/run_config.hpp"
#include "lasermot/svg_plot.hpp"
#include "lasermot/synth.hpp"
#include "lasermot/tracker.hpp"

namespace fs = std::filesystem;
using namespace lasermot;

namespace {

int run_enhance(const std::string& in_path, const std::string& out_path,
                const imaging::EnhanceParams& params) {
    const auto img = imaging::load_pgm(read_text_file(in_path));
    const auto enhanced = imaging::enhance(img, params);
    write_text_file(out_path, imaging::save_pgm(enhanced));
    std::cout << "enhanced " << img.width << "x" << img.height << " -> " << out_path << "\n";
    return 0;
}

int run_calibrate(const std::string& pairs_path, const std::string& out_path,
                  double mirror_separation, const std::string& camera_path) {
    std::istringstream in(read_text_file(pairs_path));
    const auto pairs = geometry::load_calibration_pairs(in);
    const auto sol = geometry::solve_absolute_orientation(pairs);

    geometry::CalibrationDoc doc;
    doc.quaternion = sol.quaternion;
    doc.translation = sol.transform.translation;
    doc.mirror_separation_mm = mirror_separation;
    doc.rms_residual_mm = sol.rms_residual_mm;
    if (!camera_path.empty()) {
        nlohmann::json cam_json;
        try {
            cam_json = nlohmann::json::parse(read_text_file(camera_path));
        } catch (const nlohmann::json::exception& e) {
            throw format_error(std::string("camera JSON: ") + e.what());
        }
        doc.camera = geometry::camera_from_json(cam_json.contains("camera") ? cam_json.at("camera")
                                                                            : cam_json);
        doc.has_camera = true;
    }
    write_text_file(out_path, geometry::to_json(doc).dump(2) + "\n");
    std::printf("rms_residual_mm = %.9g (%zu pairs) -> %s\n", sol.rms_residual_mm, pairs.size(),
                out_path.c_str());
    return 0;
}

int run_track(const RunConfig& cfg) {
    for (const auto& p : {cfg.detections, cfg.clouds_dir, cfg.calibration})
        if (!fs::exists(p)) throw io_error("missing input path " + p.string());

    const auto doc = geometry::parse_calibration(read_text_file(cfg.calibration));
    if (!doc.has_camera)
        throw format_error("calibration document lacks the camera model needed for tracking");

    const auto rows = read_mot_csv(read_text_file(cfg.detections));
    std::vector<cloud::Detection> detections;
    detections.reserve(rows.size());
    for (const auto& r : rows) detections.push_back(to_detection(r));

    std::map<int, cloud::PointCloud> clouds;
    for (const auto& d : detections) {
        if (clouds.count(d.frame)) continue;
        const fs::path path = cfg.clouds_dir / ("cloud_" + std::to_string(d.frame) + ".xyz");
        if (!fs::exists(path)) continue;  // run_sequence reports the frame
        std::istringstream in(read_text_file(path));
        auto c = cloud::load_xyz(in, d.frame);
        if (cfg.denoise_k > 0) c = cloud::denoise_statistical(c, cfg.denoise_k, cfg.denoise_mult);
        clouds.emplace(d.frame, std::move(c));
    }

    const auto result =
        tracker::run_sequence(detections, clouds, doc.camera, cfg.plane, cfg.assoc);

    fs::create_directories(cfg.out_dir);
    write_text_file(cfg.out_dir / "tracks.csv", write_mot_csv(result.hypothesis_rows));

    int confirmed = 0;
    for (const auto& t : result.tracks)
        if (t.state != tracker::TrackState::Tentative) ++confirmed;
    nlohmann::json summary = {{"detections", detections.size()},
                              {"rows", result.hypothesis_rows.size()},
                              {"tracks_created", result.tracks.size()},
                              {"tracks_confirmed", confirmed},
                              {"skipped_no_depth", result.no_depth_skipped}};
    write_text_file(cfg.out_dir / "summary.json", summary.dump(2) + "\n");

    std::printf("%zu rows, %zu tracks (%d confirmed), %d detections without depth -> %s\n",
                result.hypothesis_rows.size(), result.tracks.size(), confirmed,
                result.no_depth_skipped, (cfg.out_dir / "tracks.csv").c_str());
    return 0;
}

int run_eval(const std::string& gt_path, const std::string& hyp_path, double threshold,
             const std::string& mode_name, const std::string& report_path) {
    const auto mode = mode_name == "iou" ? metrics::DistanceMode::BoxIoU
                                         : metrics::DistanceMode::PlanePoint;
    const auto gt = read_mot_csv(read_text_file(gt_path));
    const auto hyp = read_mot_csv(read_text_file(hyp_path));
    const auto report = metrics::evaluate(gt, hyp, threshold, mode);
    if (!report_path.empty())
        write_text_file(report_path, metrics::report_to_json(report).dump(2) + "\n");
    std::printf("MOTA %.1f\n", report.mota);
    return 0;
}

int run_plot(const std::string& tracks_path, const std::string& out_path) {
    const auto rows = read_mot_csv(read_text_file(tracks_path));
    write_text_file(out_path, render_track_svg(rows));
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_synth(const std::string& spec_path, const std::string& out_dir, std::uint64_t seed,
              bool seed_given) {
    auto spec = synth::parse_scene_spec(read_text_file(spec_path));
    if (seed_given) spec.seed = seed;

    const auto scene = synth::gen_scene(spec);

    const fs::path dir(out_dir);
    fs::create_directories(dir / "clouds");
    write_text_file(dir / "gt.csv", write_mot_csv(scene.ground_truth));
    write_text_file(dir / "detections.csv", write_mot_csv(scene.detections));
    for (const auto& [frame, c] : scene.clouds) {
        std::ostringstream body;
        cloud::save_xyz(c, body);
        write_text_file(dir / "clouds" / ("cloud_" + std::to_string(frame) + ".xyz"), body.str());
    }

    geometry::CalibrationDoc doc;
    doc.camera = spec.camera;
    doc.has_camera = true;
    write_text_file(dir / "calibration.json", geometry::to_json(doc).dump(2) + "\n");

    std::printf("%d frames, %zu targets, %zu detections -> %s\n", spec.n_frames,
                spec.targets.size(), scene.detections.size(), out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-object tracking on a laser-projection plane"};
    app.require_subcommand(1);
    std::function<int()> runner;

    // enhance
    auto* enhance = app.add_subcommand("enhance", "Retinex-enhance a binary PGM image");
    std::string in_pgm, out_pgm;
    imaging::EnhanceParams eparams;
    enhance->add_option("input", in_pgm, "input PGM (P5, maxval 255)")->required();
    enhance->add_option("output", out_pgm, "output PGM path")->required();
    enhance->add_option("--passes", eparams.passes_per_level, "sweeps per spiral level")
        ->capture_default_str();
    enhance->add_option("--log-offset", eparams.log_offset, "offset added before the log")
        ->capture_default_str();
    enhance->callback([&] { runner = [&] { return run_enhance(in_pgm, out_pgm, eparams); }; });

    // calibrate
    auto* calibrate =
        app.add_subcommand("calibrate", "Solve the world->projector transform from point pairs");
    std::string pairs_csv, calib_out = "calibration.json", camera_json;
    double mirror_sep = 10.0;
    calibrate->add_option("pairs", pairs_csv, "CSV of label,wx,wy,wz,px,py,pz rows")->required();
    calibrate->add_option("--out", calib_out, "output calibration JSON")->capture_default_str();
    calibrate->add_option("--mirror-separation", mirror_sep, "galvo mirror separation e, mm")
        ->capture_default_str();
    calibrate->add_option("--camera", camera_json, "camera model JSON to embed");
    calibrate->callback([&] {
        runner = [&] { return run_calibrate(pairs_csv, calib_out, mirror_sep, camera_json); };
    });

    // track
    auto* track = app.add_subcommand("track", "Lift detections through clouds and track them");
    std::string config_path, track_out;
    double gate_override = 0.0;
    track->add_option("--config", config_path, "run configuration JSON")->required();
    track->add_option("--gate", gate_override, "association gate override, mm");
    track->add_option("--out", track_out, "output directory override");
    track->callback([&] {
        runner = [&] {
            auto cfg = parse_run_config(read_text_file(config_path),
                                        fs::path(config_path).parent_path());
            if (gate_override > 0.0) cfg.assoc.gate_mm = gate_override;
            if (!track_out.empty()) cfg.out_dir = track_out;
            return run_track(cfg);
        };
    });

    // eval
    auto* eval = app.add_subcommand("eval", "Score hypothesis tracks against ground truth (MOTA)");
    std::string gt_path, hyp_path, mode_name = "point", report_path;
    double threshold = 0.0;
    eval->add_option("gt", gt_path, "ground-truth MOT CSV")->required();
    eval->add_option("hyp", hyp_path, "hypothesis MOT CSV")->required();
    eval->add_option("--threshold", threshold,
                     "match threshold: mm for point mode, IoU for iou mode "
                     "(default 1000 mm / 0.5)");
    eval->add_option("--mode", mode_name, "distance mode: point|iou")
        ->check(CLI::IsMember({"point", "iou"}))
        ->capture_default_str();
    eval->add_option("--out", report_path, "write the JSON report here");
    eval->callback([&] {
        runner = [&] {
            const double th = threshold > 0.0 ? threshold : (mode_name == "iou" ? 0.5 : 1000.0);
            return run_eval(gt_path, hyp_path, th, mode_name, report_path);
        };
    });

    // plot
    auto* plot = app.add_subcommand("plot", "Render plane trajectories from a track CSV to SVG");
    std::string plot_in, plot_out;
    plot->add_option("tracks", plot_in, "track CSV")->required();
    plot->add_option("output", plot_out, "output SVG path")->required();
    plot->callback([&] { runner = [&] { return run_plot(plot_in, plot_out); }; });

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene from a spec JSON");
    std::string spec_path, synth_out = "scene";
    std::uint64_t seed = 0;
    synth_cmd->add_option("spec", spec_path, "scene spec JSON")->required();
    auto* seed_opt = synth_cmd->add_option("--seed", seed, "override the spec seed");
    synth_cmd->add_option("--out", synth_out, "output directory")->capture_default_str();
    synth_cmd->callback([&] {
        runner = [&] { return run_synth(spec_path, synth_out, seed, seed_opt->count() > 0); };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        return runner();
    } catch (const degenerate_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const contract_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
