#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lasermot/assignment.hpp"
#include "lasermot/cloud.hpp"
#include "lasermot/error.hpp"
#include "lasermot/mot_io.hpp"
#include "lasermot/types.hpp"

namespace lasermot::tracker {

enum class TrackState { Tentative, Confirmed, Dead };

struct Observation {
    int frame = 0;
    Point2 plane;  // mm on the projection plane
    Point3 world;
};

struct Track {
    int id = 0;  // assigned in creation order, never reused
    int class_id = 0;
    TrackState state = TrackState::Tentative;
    std::vector<Observation> history;  // frames strictly increasing
    int hits = 0;
    int consecutive_misses = 0;

    const Observation& last() const { return history.back(); }
};

struct AssocParams {
    double gate_mm = 2000.0;  // hard association cutoff
    int min_hits = 3;         // confirmation threshold
    int max_misses = 5;       // deletion threshold

    void validate() const {
        if (!(gate_mm > 0.0)) throw contract_error("gate must be positive");
        if (min_hits < 1) throw contract_error("min_hits must be >= 1");
        if (max_misses < 0) throw contract_error("max_misses must be >= 0");
    }
};

// Linear extrapolation from the last two observations; a single
// observation predicts in place. Velocity is normalized per frame.
inline Point2 predict(const Track& t, int frame) {
    if (t.state == TrackState::Dead) throw contract_error("cannot predict a dead track");
    if (t.history.empty()) throw contract_error("cannot predict an empty track");
    const Observation& last = t.history.back();
    if (frame <= last.frame) throw contract_error("prediction frame must be ahead of history");
    if (t.history.size() == 1) return last.plane;
    const Observation& prev = t.history[t.history.size() - 2];
    const double per_frame = 1.0 / static_cast<double>(last.frame - prev.frame);
    const Point2 velocity = (last.plane - prev.plane) * per_frame;
    return last.plane + velocity * static_cast<double>(frame - last.frame);
}

// World-space counterpart of predict(), used when a coasted position
// must be reported in full 3D.
inline Point3 predict_world(const Track& t, int frame) {
    if (t.state == TrackState::Dead) throw contract_error("cannot predict a dead track");
    if (t.history.empty()) throw contract_error("cannot predict an empty track");
    const Observation& last = t.history.back();
    if (t.history.size() == 1) return last.world;
    const Observation& prev = t.history[t.history.size() - 2];
    const double per_frame = 1.0 / static_cast<double>(last.frame - prev.frame);
    const Vec3 velocity = (last.world.v - prev.world.v) * per_frame;
    return {last.world.v + velocity * static_cast<double>(frame - last.frame), last.world.frame};
}

struct Association {
    std::vector<std::pair<int, int>> pairs;  // (prediction index, observation index)
    std::vector<int> unmatched_predictions;
    std::vector<int> unmatched_observations;
};

// One-to-one minimum-total-distance matching among pairs within the gate.
inline Association associate(const std::vector<Point2>& predicted,
                             const std::vector<Point2>& observed, double gate_mm) {
    if (!(gate_mm > 0.0)) throw contract_error("gate must be positive");
    if (predicted.empty() || observed.empty()) {
        Association a;
        for (size_t i = 0; i < predicted.size(); ++i) a.unmatched_predictions.push_back(static_cast<int>(i));
        for (size_t j = 0; j < observed.size(); ++j) a.unmatched_observations.push_back(static_cast<int>(j));
        return a;
    }
    std::vector<std::vector<double>> cost(predicted.size(),
                                          std::vector<double>(observed.size(), kForbidden));
    for (size_t i = 0; i < predicted.size(); ++i)
        for (size_t j = 0; j < observed.size(); ++j) {
            const double d = distance(predicted[i], observed[j]);
            if (d <= gate_mm) cost[i][j] = d;
        }
    const Matching m = solve_assignment(cost);
    return {m.pairs, m.unmatched_rows, m.unmatched_cols};
}

struct StepObservation {
    Point2 plane;
    Point3 world;
    int class_id = 0;
};

struct StepEvents {
    std::vector<std::pair<int, int>> created;  // (track id, observation index)
    std::vector<std::pair<int, int>> updated;  // (track id, observation index)
    std::vector<int> confirmed;                // track ids
    std::vector<int> killed;                   // track ids
};

class TrackerState {
public:
    const std::vector<Track>& tracks() const { return tracks_; }
    int current_frame() const { return current_frame_; }

    // One frame of the lifecycle: predict, associate within class,
    // update matches, age unmatched tracks, spawn tracks for unmatched
    // observations.
    StepEvents step(int frame, const std::vector<StepObservation>& observations,
                    const AssocParams& params) {
        params.validate();
        if (frame <= current_frame_)
            throw contract_error("frame index must increase (got " + std::to_string(frame) +
                                 " after " + std::to_string(current_frame_) + ")");

        StepEvents events;

        // Partition live tracks and observations by class; cross-class
        // matches are forbidden.
        std::map<int, std::pair<std::vector<size_t>, std::vector<size_t>>> by_class;
        for (size_t i = 0; i < tracks_.size(); ++i)
            if (tracks_[i].state != TrackState::Dead)
                by_class[tracks_[i].class_id].first.push_back(i);
        for (size_t j = 0; j < observations.size(); ++j)
            by_class[observations[j].class_id].second.push_back(j);

        std::vector<bool> track_matched(tracks_.size(), false);

        for (auto& [class_id, split] : by_class) {
            const auto& track_idx = split.first;
            const auto& obs_idx = split.second;

            std::vector<Point2> predicted(track_idx.size());
            for (size_t r = 0; r < track_idx.size(); ++r)
                predicted[r] = predict(tracks_[track_idx[r]], frame);
            std::vector<Point2> observed(obs_idx.size());
            for (size_t c = 0; c < obs_idx.size(); ++c) observed[c] = observations[obs_idx[c]].plane;

            const Association assoc = associate(predicted, observed, params.gate_mm);

            for (const auto& [r, c] : assoc.pairs) {
                Track& t = tracks_[track_idx[static_cast<size_t>(r)]];
                const StepObservation& o = observations[obs_idx[static_cast<size_t>(c)]];
                t.history.push_back({frame, o.plane, o.world});
                t.hits += 1;
                t.consecutive_misses = 0;
                track_matched[track_idx[static_cast<size_t>(r)]] = true;
                events.updated.emplace_back(t.id, static_cast<int>(obs_idx[static_cast<size_t>(c)]));
                if (t.state == TrackState::Tentative && t.hits >= params.min_hits) {
                    t.state = TrackState::Confirmed;
                    events.confirmed.push_back(t.id);
                }
            }

            for (int c : assoc.unmatched_observations) {
                const StepObservation& o = observations[obs_idx[static_cast<size_t>(c)]];
                Track t;
                t.id = next_id_++;
                t.class_id = o.class_id;
                t.history.push_back({frame, o.plane, o.world});
                t.hits = 1;
                if (t.hits >= params.min_hits) t.state = TrackState::Confirmed;
                events.created.emplace_back(t.id, static_cast<int>(obs_idx[static_cast<size_t>(c)]));
                if (t.state == TrackState::Confirmed) events.confirmed.push_back(t.id);
                tracks_.push_back(std::move(t));
                track_matched.push_back(true);
            }
        }

        for (size_t i = 0; i < tracks_.size(); ++i) {
            Track& t = tracks_[i];
            if (t.state == TrackState::Dead || track_matched[i]) continue;
            t.consecutive_misses += 1;
            if (t.consecutive_misses > params.max_misses) {
                t.state = TrackState::Dead;
                events.killed.push_back(t.id);
            }
        }

        current_frame_ = frame;
        return events;
    }

private:
    std::vector<Track> tracks_;
    int next_id_ = 1;
    int current_frame_ = -1;
};

struct RunResult {
    std::vector<MotRow> hypothesis_rows;  // sorted by (frame, id)
    std::vector<Track> tracks;
    int no_depth_skipped = 0;
};

// Full per-sequence pipeline: lift each detection into the world through
// the cloud, project onto the plane, and feed the tracker frame by frame
// over the contiguous range spanned by the detections. Detections with no
// cloud support are skipped and counted. Confirmed tracks that miss a
// frame emit their extrapolated position with the last seen box, so short
// detector dropouts do not punch holes in the output.
inline RunResult run_sequence(const std::vector<cloud::Detection>& detections,
                              const std::map<int, cloud::PointCloud>& clouds,
                              const cloud::CameraModel& cam, const cloud::ProjectionPlane& plane,
                              const AssocParams& params) {
    params.validate();
    cam.validate();

    RunResult result;
    if (detections.empty()) return result;

    std::map<int, std::vector<cloud::Detection>> by_frame;
    for (const auto& d : detections) by_frame[d.frame].push_back(d);

    TrackerState state;
    std::map<int, MotRow> last_row_by_id;

    const int first = by_frame.begin()->first;
    const int last = by_frame.rbegin()->first;
    for (int frame = first; frame <= last; ++frame) {
        std::vector<StepObservation> obs;
        std::vector<const cloud::Detection*> obs_source;

        const auto it = by_frame.find(frame);
        if (it != by_frame.end() && !it->second.empty()) {
            const auto cloud_it = clouds.find(frame);
            if (cloud_it == clouds.end())
                throw io_error("no point cloud for frame " + std::to_string(frame));
            for (const auto& det : it->second) {
                const auto world = cloud::lift_detection(det, cam, cloud_it->second);
                if (!world) {
                    ++result.no_depth_skipped;
                    continue;
                }
                obs.push_back({cloud::project_to_plane(*world, plane), *world, det.class_id});
                obs_source.push_back(&det);
            }
        }

        const StepEvents events = state.step(frame, obs, params);

        auto emit = [&](int id, int obs_index) {
            const cloud::Detection& det = *obs_source[static_cast<size_t>(obs_index)];
            MotRow row;
            row.frame = frame;
            row.id = id;
            row.left = det.left;
            row.top = det.top;
            row.width = det.width;
            row.height = det.height;
            row.confidence = det.confidence;
            row.class_id = det.class_id;
            row.world = obs[static_cast<size_t>(obs_index)].world.v;
            result.hypothesis_rows.push_back(row);
            last_row_by_id[id] = row;
        };
        for (const auto& [id, oi] : events.updated) emit(id, oi);
        for (const auto& [id, oi] : events.created) emit(id, oi);

        for (const Track& t : state.tracks()) {
            if (t.state != TrackState::Confirmed || t.last().frame >= frame) continue;
            MotRow row = last_row_by_id.at(t.id);
            row.frame = frame;
            row.world = predict_world(t, frame).v;
            result.hypothesis_rows.push_back(row);
        }
    }

    std::stable_sort(result.hypothesis_rows.begin(), result.hypothesis_rows.end(),
                     [](const MotRow& a, const MotRow& b) {
                         return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
                     });
    result.tracks = state.tracks();
    return result;
}

} // namespace lasermot::tracker
