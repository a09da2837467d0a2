#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lasermot/cloud.hpp"
#include "lasermot/error.hpp"
#include "lasermot/mot_io.hpp"

namespace lasermot {

// Bird's-eye trajectory rendering: one polyline per track id on the
// projection plane, color keyed by id, axes in millimeters. An empty row
// set still yields a valid SVG with axes.
inline std::string render_track_svg(const std::vector<MotRow>& rows,
                                    const cloud::ProjectionPlane& plane =
                                        cloud::ProjectionPlane::ground()) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    std::map<int, std::vector<std::pair<int, Point2>>> by_id;
    for (const auto& r : rows) {
        if (!r.world) throw format_error("track row lacks world coordinates");
        by_id[r.id].emplace_back(r.frame,
                                 cloud::project_to_plane({*r.world, Frame::World}, plane));
    }
    for (auto& [id, pts] : by_id)
        std::sort(pts.begin(), pts.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

    double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
    bool first = true;
    for (const auto& [id, pts] : by_id)
        for (const auto& [frame, p] : pts) {
            if (first) {
                min_x = max_x = p.x;
                min_y = max_y = p.y;
                first = false;
            } else {
                min_x = std::min(min_x, p.x);
                max_x = std::max(max_x, p.x);
                min_y = std::min(min_y, p.y);
                max_y = std::max(max_y, p.y);
            }
        }
    if (max_x - min_x < 1e-9) {
        min_x -= 1.0;
        max_x += 1.0;
    }
    if (max_y - min_y < 1e-9) {
        min_y -= 1.0;
        max_y += 1.0;
    }

    const double width = 800.0, height = 600.0, margin = 70.0;
    const double plot_w = width - 2.0 * margin, plot_h = height - 2.0 * margin;
    auto sx = [&](double x) { return margin + (x - min_x) / (max_x - min_x) * plot_w; };
    auto sy = [&](double y) { return height - margin - (y - min_y) / (max_y - min_y) * plot_h; };

    std::ostringstream svg;
    char buf[160];
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
           "viewBox=\"0 0 800 600\">\n";
    svg << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";

    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  margin, height - margin, width - margin, height - margin);
    svg << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  margin, margin, margin, height - margin);
    svg << buf;

    for (int t = 0; t <= 4; ++t) {
        const double fx = min_x + (max_x - min_x) * t / 4.0;
        const double fy = min_y + (max_y - min_y) * t / 4.0;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\">%.0f"
                      "</text>\n",
                      sx(fx), height - margin + 18.0, fx);
        svg << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"end\">%.0f"
                      "</text>\n",
                      margin - 6.0, sy(fy) + 4.0, fy);
        svg << buf;
    }
    svg << "<text x=\"400\" y=\"590\" font-size=\"14\" text-anchor=\"middle\">x [mm]</text>\n";
    svg << "<text x=\"16\" y=\"300\" font-size=\"14\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 16 300)\">y [mm]</text>\n";

    for (const auto& [id, pts] : by_id) {
        const char* color = palette[static_cast<size_t>(id >= 0 ? id : -id) % 10];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < pts.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.1f,%.1f", i ? " " : "", sx(pts[i].second.x),
                          sy(pts[i].second.y));
            svg << buf;
        }
        svg << "\"/>\n";
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" fill=\"%s\">%d</text>\n",
                      sx(pts.front().second.x) + 4.0, sy(pts.front().second.y) - 4.0, color, id);
        svg << buf;
    }

    svg << "</svg>\n";
    return svg.str();
}

} // namespace lasermot
