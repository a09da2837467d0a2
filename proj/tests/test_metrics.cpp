#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "lasermot/metrics.hpp"
#include "lasermot/synth.hpp"

using namespace lasermot;
using namespace lasermot::metrics;

namespace {

MotObject at(int id, double x, double y) {
    MotObject o;
    o.id = id;
    o.pos = {x, y};
    return o;
}

MotRow row(int frame, int id, double wx, double wy) {
    MotRow r;
    r.frame = frame;
    r.id = id;
    r.left = 0;
    r.top = 0;
    r.width = 10;
    r.height = 10;
    r.world = Vec3{wx, wy, 0.0};
    return r;
}

} // namespace

TEST_CASE("match_frame basics") {
    MatchState state;
    const auto counts = match_frame({at(1, 0, 0), at(2, 100, 0)},
                                    {at(10, 0, 0), at(20, 100, 0)}, state, 50.0,
                                    DistanceMode::PlanePoint, 1);
    CHECK(counts.ground_truth == 2);
    CHECK(counts.false_negatives == 0);
    CHECK(counts.false_positives == 0);
    CHECK(counts.id_switches == 0);

    MatchState s2;
    const auto miss = match_frame({at(1, 0, 0)}, {}, s2, 50.0, DistanceMode::PlanePoint, 1);
    CHECK(miss.false_negatives == 1);
    CHECK(miss.false_positives == 0);

    MatchState s3;
    const auto fp = match_frame({}, {at(10, 0, 0)}, s3, 50.0, DistanceMode::PlanePoint, 1);
    CHECK(fp.false_positives == 1);
    CHECK(fp.ground_truth == 0);
}

TEST_CASE("a hypothesis id swap costs two switches") {
    MatchState state;
    match_frame({at(1, 0, 0), at(2, 100, 0)}, {at(10, 0, 0), at(20, 100, 0)}, state, 50.0,
                DistanceMode::PlanePoint, 1);
    const auto swapped = match_frame({at(1, 0, 0), at(2, 100, 0)},
                                     {at(20, 0, 0), at(10, 100, 0)}, state, 50.0,
                                     DistanceMode::PlanePoint, 2);
    CHECK(swapped.id_switches == 2);
    CHECK(swapped.false_negatives == 0);
    CHECK(swapped.false_positives == 0);
}

TEST_CASE("sticky correspondence survives a gap and prevents a switch") {
    MatchState state;
    match_frame({at(1, 0, 0)}, {at(10, 0, 0)}, state, 50.0, DistanceMode::PlanePoint, 1);
    // Target vanishes for a frame; its hypothesis persists elsewhere.
    match_frame({}, {at(10, 500, 0)}, state, 50.0, DistanceMode::PlanePoint, 2);
    const auto back = match_frame({at(1, 500, 0)}, {at(10, 500, 0)}, state, 50.0,
                                  DistanceMode::PlanePoint, 3);
    CHECK(back.id_switches == 0);
}

TEST_CASE("counts balance every frame") {
    synth::SplitMix64 rng(601);
    MatchState state;
    for (int frame = 1; frame <= 20; ++frame) {
        std::vector<MotObject> gt, hyp;
        const int ng = static_cast<int>(rng.next() % 5);
        const int nh = static_cast<int>(rng.next() % 5);
        for (int i = 0; i < ng; ++i)
            gt.push_back(at(i + 1, rng.uniform(-500, 500), rng.uniform(-500, 500)));
        for (int j = 0; j < nh; ++j)
            hyp.push_back(at(100 + j, rng.uniform(-500, 500), rng.uniform(-500, 500)));
        const auto c = match_frame(gt, hyp, state, 200.0, DistanceMode::PlanePoint, frame);
        const int matches = c.ground_truth - c.false_negatives;
        CHECK(matches >= 0);
        CHECK(c.false_positives == static_cast<int>(hyp.size()) - matches);
        CHECK(c.false_negatives <= c.ground_truth);
    }
}

TEST_CASE("mota arithmetic") {
    std::vector<FrameCounts> frames(10);
    for (int i = 0; i < 10; ++i) {
        frames[static_cast<size_t>(i)].frame = i + 1;
        frames[static_cast<size_t>(i)].ground_truth = 10;
    }
    frames[0].false_negatives = 10;
    frames[2].false_positives = 5;
    frames[3].id_switches = 2;
    CHECK(mota(frames) == 83.0);  // (1 - 17/100) x 100, exactly

    std::vector<FrameCounts> perfect(3);
    for (auto& f : perfect) f.ground_truth = 4;
    CHECK(mota(perfect) == 100.0);

    std::vector<FrameCounts> awful(1);
    awful[0].ground_truth = 2;
    awful[0].false_negatives = 2;
    awful[0].false_positives = 7;
    CHECK(mota(awful) == -350.0);  // the formula has no floor

    CHECK_THROWS_AS(mota(std::vector<FrameCounts>{}), degenerate_error);
    std::vector<FrameCounts> no_gt(2);
    CHECK_THROWS_AS(mota(no_gt), degenerate_error);
}

TEST_CASE("evaluate on identical files scores 100") {
    std::vector<MotRow> gt;
    for (int f = 1; f <= 5; ++f) {
        gt.push_back(row(f, 1, f * 10.0, 0.0));
        gt.push_back(row(f, 2, f * 10.0, 500.0));
    }
    const auto report = evaluate(gt, gt, 100.0);
    CHECK(report.mota == 100.0);
    CHECK(report.total_ids == 0);
    CHECK(report.total_gt == 10);
}

TEST_CASE("evaluate with no hypotheses scores 0") {
    std::vector<MotRow> gt{row(1, 1, 0, 0), row(2, 1, 10, 0)};
    const auto report = evaluate(gt, {}, 100.0);
    CHECK(report.mota == 0.0);
    CHECK(report.total_fn == 2);
    CHECK(report.total_fp == 0);
}

TEST_CASE("evaluate three-frame fixture with a swap and a miss") {
    std::vector<MotRow> gt;
    for (int f = 1; f <= 3; ++f) {
        gt.push_back(row(f, 1, 0.0, 0.0));
        gt.push_back(row(f, 2, 1000.0, 0.0));
    }
    std::vector<MotRow> hyp;
    hyp.push_back(row(1, 10, 0.0, 0.0));
    hyp.push_back(row(1, 20, 1000.0, 0.0));
    hyp.push_back(row(2, 20, 0.0, 0.0));  // ids swap
    hyp.push_back(row(2, 10, 1000.0, 0.0));
    hyp.push_back(row(3, 10, 1000.0, 0.0));  // g1's mate is gone

    const auto report = evaluate(gt, hyp, 100.0);
    REQUIRE(report.frames.size() == 3);
    CHECK(report.frames[0].id_switches == 0);
    CHECK(report.frames[1].id_switches == 2);
    CHECK(report.frames[2].false_negatives == 1);
    CHECK(report.frames[2].id_switches == 0);  // g2 keeps h10 from frame 2
    CHECK(report.total_gt == 6);
    CHECK(report.mota == 50.0);  // 100 x (6 - 3) / 6
}

TEST_CASE("mota is invariant under bijective relabeling of hypothesis ids") {
    synth::SplitMix64 rng(602);
    std::vector<MotRow> gt, hyp;
    for (int f = 1; f <= 10; ++f)
        for (int i = 0; i < 4; ++i) {
            gt.push_back(row(f, i + 1, i * 400.0, f * 10.0));
            if (rng.uniform() < 0.8)
                hyp.push_back(row(f, 50 + i, i * 400.0 + rng.uniform(-30.0, 30.0), f * 10.0));
        }
    const double base = evaluate(gt, hyp, 150.0).mota;

    for (int trial = 0; trial < 20; ++trial) {
        std::map<int, int> rename;
        int next = 1000 + static_cast<int>(rng.next() % 100);
        for (const auto& r : hyp)
            if (!rename.count(r.id)) rename[r.id] = next++;
        std::vector<MotRow> renamed = hyp;
        for (auto& r : renamed) r.id = rename[r.id];
        CHECK(evaluate(gt, renamed, 150.0).mota == base);
    }
}

TEST_CASE("one extra unmatched hypothesis lowers mota by 100/GT") {
    std::vector<MotRow> gt;
    for (int f = 1; f <= 10; ++f)
        for (int i = 0; i < 10; ++i) gt.push_back(row(f, i + 1, i * 1000.0, 0.0));
    const double before = evaluate(gt, gt, 100.0).mota;

    std::vector<MotRow> hyp = gt;
    hyp.push_back(row(5, 999, 55555.0, 55555.0));  // far from everything
    const double after = evaluate(gt, hyp, 100.0).mota;
    CHECK(before - after == 1.0);  // 100 / 100 ground truths
}

TEST_CASE("IoU mode matches on overlap, not distance") {
    MotObject g;
    g.id = 1;
    g.left = 0;
    g.top = 0;
    g.width = 10;
    g.height = 10;
    g.has_box = true;
    MotObject h = g;
    h.id = 10;

    MatchState state;
    const auto same = match_frame({g}, {h}, state, 0.5, DistanceMode::BoxIoU, 1);
    CHECK(same.false_negatives == 0);

    h.left = 5.0;  // IoU = 50/150 = 1/3 < 0.5
    MatchState s2;
    const auto shifted = match_frame({g}, {h}, s2, 0.5, DistanceMode::BoxIoU, 1);
    CHECK(shifted.false_negatives == 1);
    CHECK(shifted.false_positives == 1);

    CHECK(box_iou(g, g) == 1.0);
    h.left = 20.0;
    CHECK(box_iou(g, h) == 0.0);
}

TEST_CASE("evaluate requires world columns in point mode") {
    MotRow bare;
    bare.frame = 1;
    bare.id = 1;
    CHECK_THROWS_AS(evaluate({bare}, {bare}, 100.0), format_error);
}
