#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lasermot/assignment.hpp"
#include "lasermot/cloud.hpp"
#include "lasermot/error.hpp"
#include "lasermot/mot_io.hpp"
#include "lasermot/types.hpp"

namespace lasermot::metrics {

struct FrameCounts {
    int frame = 0;
    int false_negatives = 0;  // ground truth present, nothing matched
    int false_positives = 0;  // hypothesis present, nothing matched
    int id_switches = 0;      // matched id differs from the last-ever match
    int ground_truth = 0;
};

struct MotReport {
    std::vector<FrameCounts> frames;
    long total_fn = 0;
    long total_fp = 0;
    long total_ids = 0;
    long total_gt = 0;
    double mota = 0.0;  // percentage, may be negative
};

// A labeled object in one frame: plane position and/or a 2D box.
struct MotObject {
    int id = 0;
    Point2 pos;
    double left = 0.0, top = 0.0, width = 0.0, height = 0.0;
    bool has_box = false;
};

enum class DistanceMode {
    PlanePoint,  // Euclidean mm on plane points, gate: distance <= threshold
    BoxIoU,      // cost 1 - IoU, gate: IoU >= threshold
};

inline double box_iou(const MotObject& a, const MotObject& b) {
    const double ix = std::max(0.0, std::min(a.left + a.width, b.left + b.width) -
                                        std::max(a.left, b.left));
    const double iy = std::max(0.0, std::min(a.top + a.height, b.top + b.height) -
                                        std::max(a.top, b.top));
    const double inter = ix * iy;
    const double uni = a.width * a.height + b.width * b.height - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

// Sticky correspondences plus the per-target last-ever match, carried
// across frames.
struct MatchState {
    std::map<int, int> current;     // gt id -> hyp id, persists until contradicted
    std::map<int, int> last_match;  // gt id -> last hyp id it ever matched
};

// CLEAR-MOT per-frame correspondence: carry over still-valid pairs from
// the previous frame, assign the remainder optimally, then count misses,
// false positives, and identity switches against the last-ever match.
inline FrameCounts match_frame(const std::vector<MotObject>& gt, const std::vector<MotObject>& hyp,
                               MatchState& state, double threshold, DistanceMode mode,
                               int frame = 0) {
    if (!(threshold > 0.0)) throw contract_error("threshold must be positive");

    auto gated_cost = [&](const MotObject& g, const MotObject& h) -> double {
        if (mode == DistanceMode::PlanePoint) {
            const double d = distance(g.pos, h.pos);
            return d <= threshold ? d : kForbidden;
        }
        const double iou = box_iou(g, h);
        return iou >= threshold ? 1.0 - iou : kForbidden;
    };

    std::map<int, size_t> hyp_by_id;
    for (size_t j = 0; j < hyp.size(); ++j) hyp_by_id[hyp[j].id] = j;

    std::vector<bool> gt_taken(gt.size(), false);
    std::vector<bool> hyp_taken(hyp.size(), false);
    std::vector<std::pair<size_t, size_t>> matches;

    // Sticky pass.
    for (size_t i = 0; i < gt.size(); ++i) {
        const auto prev = state.current.find(gt[i].id);
        if (prev == state.current.end()) continue;
        const auto j = hyp_by_id.find(prev->second);
        if (j == hyp_by_id.end() || hyp_taken[j->second]) continue;
        if (gated_cost(gt[i], hyp[j->second]) == kForbidden) continue;
        gt_taken[i] = true;
        hyp_taken[j->second] = true;
        matches.emplace_back(i, j->second);
    }

    // Optimal assignment on the remainder.
    std::vector<size_t> free_gt, free_hyp;
    for (size_t i = 0; i < gt.size(); ++i)
        if (!gt_taken[i]) free_gt.push_back(i);
    for (size_t j = 0; j < hyp.size(); ++j)
        if (!hyp_taken[j]) free_hyp.push_back(j);

    std::vector<std::vector<double>> cost(free_gt.size(), std::vector<double>(free_hyp.size()));
    for (size_t r = 0; r < free_gt.size(); ++r)
        for (size_t c = 0; c < free_hyp.size(); ++c)
            cost[r][c] = gated_cost(gt[free_gt[r]], hyp[free_hyp[c]]);
    for (const auto& [r, c] : solve_assignment(cost).pairs)
        matches.emplace_back(free_gt[static_cast<size_t>(r)], free_hyp[static_cast<size_t>(c)]);

    FrameCounts counts;
    counts.frame = frame;
    counts.ground_truth = static_cast<int>(gt.size());
    counts.false_negatives = static_cast<int>(gt.size() - matches.size());
    counts.false_positives = static_cast<int>(hyp.size() - matches.size());
    for (const auto& [i, j] : matches) {
        const int gt_id = gt[i].id;
        const int hyp_id = hyp[j].id;
        const auto last = state.last_match.find(gt_id);
        if (last != state.last_match.end() && last->second != hyp_id) counts.id_switches += 1;
        state.last_match[gt_id] = hyp_id;
        state.current[gt_id] = hyp_id;
    }
    return counts;
}

// M = (1 - sum(F + P + I) / sum(G)) x 100, aggregated over frames.
inline double mota(const std::vector<FrameCounts>& frames) {
    long errors = 0, gt = 0;
    for (const auto& f : frames) {
        errors += f.false_negatives + f.false_positives + f.id_switches;
        gt += f.ground_truth;
    }
    if (gt == 0) throw degenerate_error("MOTA undefined: no ground-truth boxes");
    return 100.0 * static_cast<double>(gt - errors) / static_cast<double>(gt);
}

namespace detail {

inline std::vector<MotObject> to_objects(const std::vector<MotRow>& rows, DistanceMode mode,
                                         const cloud::ProjectionPlane& plane, const char* which) {
    std::vector<MotObject> objects;
    objects.reserve(rows.size());
    for (const auto& r : rows) {
        MotObject o;
        o.id = r.id;
        o.left = r.left;
        o.top = r.top;
        o.width = r.width;
        o.height = r.height;
        o.has_box = true;
        if (mode == DistanceMode::PlanePoint) {
            if (!r.world)
                throw format_error(std::string(which) +
                                   " row lacks world coordinates needed for plane matching");
            o.pos = cloud::project_to_plane({*r.world, Frame::World}, plane);
        }
        objects.push_back(o);
    }
    return objects;
}

} // namespace detail

// Score hypothesis rows against ground truth over the union of frames.
inline MotReport evaluate(const std::vector<MotRow>& gt_rows, const std::vector<MotRow>& hyp_rows,
                          double threshold, DistanceMode mode = DistanceMode::PlanePoint,
                          const cloud::ProjectionPlane& plane = cloud::ProjectionPlane::ground()) {
    const auto gt_by_frame = group_by_frame(gt_rows);
    const auto hyp_by_frame = group_by_frame(hyp_rows);

    std::set<int> frames;
    for (const auto& [f, _] : gt_by_frame) frames.insert(f);
    for (const auto& [f, _] : hyp_by_frame) frames.insert(f);

    MotReport report;
    MatchState state;
    static const std::vector<MotRow> empty;
    for (int frame : frames) {
        const auto git = gt_by_frame.find(frame);
        const auto hit = hyp_by_frame.find(frame);
        const auto gt = detail::to_objects(git == gt_by_frame.end() ? empty : git->second, mode,
                                           plane, "ground-truth");
        const auto hyp = detail::to_objects(hit == hyp_by_frame.end() ? empty : hit->second, mode,
                                            plane, "hypothesis");
        report.frames.push_back(match_frame(gt, hyp, state, threshold, mode, frame));
    }
    for (const auto& f : report.frames) {
        report.total_fn += f.false_negatives;
        report.total_fp += f.false_positives;
        report.total_ids += f.id_switches;
        report.total_gt += f.ground_truth;
    }
    report.mota = mota(report.frames);
    return report;
}

inline nlohmann::json report_to_json(const MotReport& r) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : r.frames)
        frames.push_back({{"frame", f.frame},
                          {"fn", f.false_negatives},
                          {"fp", f.false_positives},
                          {"ids", f.id_switches},
                          {"gt", f.ground_truth}});
    return {{"mota", r.mota},
            {"totals",
             {{"fn", r.total_fn}, {"fp", r.total_fp}, {"ids", r.total_ids}, {"gt", r.total_gt}}},
            {"frames", frames}};
}

} // namespace lasermot::metrics
