#include <catch2/catch_amalgamated.hpp>

#include "lasermot/mot_io.hpp"
#include "lasermot/svg_plot.hpp"

using namespace lasermot;

TEST_CASE("mot csv round trip") {
    std::vector<MotRow> rows(2);
    rows[0].frame = 1;
    rows[0].id = 3;
    rows[0].left = 10.5;
    rows[0].top = 20.25;
    rows[0].width = 30.0;
    rows[0].height = 40.0;
    rows[0].confidence = 0.875;
    rows[0].class_id = 2;
    rows[0].world = Vec3{1.5, -2.5, 3000.0};
    rows[1].frame = 2;
    rows[1].id = -1;  // raw detection, no world point

    const std::string text = write_mot_csv(rows);
    const auto back = read_mot_csv(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].frame == 1);
    CHECK(back[0].id == 3);
    CHECK(back[0].confidence == 0.875);
    REQUIRE(back[0].world.has_value());
    CHECK(back[0].world->z == 3000.0);
    CHECK(back[1].id == -1);
    CHECK_FALSE(back[1].world.has_value());

    // stable formatting: a second serialization is byte-identical
    CHECK(write_mot_csv(back) == text);
}

TEST_CASE("mot csv rejects malformed rows with line numbers") {
    try {
        read_mot_csv(std::string("1,-1,0,0,10,10,0.9,0,,,\n1,-1,0,0,10,10,0.9,0\n"));
        FAIL("expected format_error");
    } catch (const format_error& e) {
        CHECK(e.line() == 2);
    }
    try {
        read_mot_csv(std::string("1,-1,0,zz,10,10,0.9,0,,,\n"));
        FAIL("expected format_error");
    } catch (const format_error& e) {
        CHECK(e.line() == 1);
    }
    // world columns must be all present or all empty
    CHECK_THROWS_AS(read_mot_csv(std::string("1,-1,0,0,10,10,0.9,0,1.0,,\n")), format_error);
}

TEST_CASE("mot csv ignores comments and blank lines") {
    const auto rows = read_mot_csv(std::string("# header\n\n1,-1,0,0,10,10,0.9,0,,,\n"));
    CHECK(rows.size() == 1);
}

namespace {
size_t count_occurrences(const std::string& hay, const std::string& needle) {
    size_t n = 0;
    for (size_t pos = 0; (pos = hay.find(needle, pos)) != std::string::npos; pos += needle.size())
        ++n;
    return n;
}
} // namespace

TEST_CASE("track svg draws one polyline per id with one vertex per row") {
    std::vector<MotRow> rows(2);
    rows[0].frame = 1;
    rows[0].id = 4;
    rows[0].world = Vec3{0.0, 0.0, 0.0};
    rows[1].frame = 2;
    rows[1].id = 4;
    rows[1].world = Vec3{500.0, 250.0, 0.0};

    const std::string svg = render_track_svg(rows);
    CHECK(count_occurrences(svg, "<polyline") == 1);
    const size_t start = svg.find("points=\"");
    REQUIRE(start != std::string::npos);
    const size_t end = svg.find('"', start + 8);
    const std::string points = svg.substr(start + 8, end - start - 8);
    CHECK(count_occurrences(points, ",") == 2);  // two x,y vertices

    MotRow bare;
    bare.frame = 1;
    bare.id = 1;
    CHECK_THROWS_AS(render_track_svg({bare}), format_error);
}

TEST_CASE("track svg of an empty row set still renders axes") {
    const std::string svg = render_track_svg({});
    CHECK(count_occurrences(svg, "<polyline") == 0);
    CHECK(svg.find("x [mm]") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}
