#pragma once

#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lasermot/cloud.hpp"
#include "lasermot/error.hpp"
#include "lasermot/types.hpp"

namespace lasermot {

// One row of the MOT CSV schema:
//   frame,id,left,top,width,height,confidence,class_id,wx,wy,wz
// Detections carry id = -1 and empty world columns; tracker output and
// ground truth fill all eleven fields.
struct MotRow {
    int frame = 0;
    int id = -1;
    double left = 0.0, top = 0.0, width = 0.0, height = 0.0;
    double confidence = 1.0;
    int class_id = 0;
    std::optional<Vec3> world;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_num(const std::string& tok, long line_no, const char* what) {
    try {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("trailing garbage");
        return v;
    } catch (const std::exception&) {
        throw format_error(std::string("bad ") + what + " '" + tok + "'", line_no);
    }
}

inline int parse_int(const std::string& tok, long line_no, const char* what) {
    try {
        size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("trailing garbage");
        return v;
    } catch (const std::exception&) {
        throw format_error(std::string("bad ") + what + " '" + tok + "'", line_no);
    }
}

} // namespace detail

inline std::vector<MotRow> read_mot_csv(std::istream& in) {
    std::vector<MotRow> rows;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto f = detail::split_csv(line);
        if (f.size() != 11)
            throw format_error("expected 11 fields, got " + std::to_string(f.size()), line_no);
        MotRow r;
        r.frame = detail::parse_int(f[0], line_no, "frame");
        r.id = detail::parse_int(f[1], line_no, "id");
        r.left = detail::parse_num(f[2], line_no, "left");
        r.top = detail::parse_num(f[3], line_no, "top");
        r.width = detail::parse_num(f[4], line_no, "width");
        r.height = detail::parse_num(f[5], line_no, "height");
        r.confidence = detail::parse_num(f[6], line_no, "confidence");
        r.class_id = detail::parse_int(f[7], line_no, "class_id");
        const bool wx = !f[8].empty(), wy = !f[9].empty(), wz = !f[10].empty();
        if (wx != wy || wy != wz)
            throw format_error("world columns must be all present or all empty", line_no);
        if (wx)
            r.world = Vec3{detail::parse_num(f[8], line_no, "wx"),
                           detail::parse_num(f[9], line_no, "wy"),
                           detail::parse_num(f[10], line_no, "wz")};
        rows.push_back(r);
    }
    return rows;
}

inline std::vector<MotRow> read_mot_csv(const std::string& text) {
    std::istringstream in(text);
    return read_mot_csv(in);
}

inline void write_mot_csv(const std::vector<MotRow>& rows, std::ostream& out) {
    char buf[256];
    for (const auto& r : rows) {
        if (r.world) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.2f,%.2f,%.2f,%.2f,%.4f,%d,%.4f,%.4f,%.4f\n",
                          r.frame, r.id, r.left, r.top, r.width, r.height, r.confidence,
                          r.class_id, r.world->x, r.world->y, r.world->z);
        } else {
            std::snprintf(buf, sizeof buf, "%d,%d,%.2f,%.2f,%.2f,%.2f,%.4f,%d,,,\n", r.frame,
                          r.id, r.left, r.top, r.width, r.height, r.confidence, r.class_id);
        }
        out << buf;
    }
}

inline std::string write_mot_csv(const std::vector<MotRow>& rows) {
    std::ostringstream out;
    write_mot_csv(rows, out);
    return out.str();
}

inline cloud::Detection to_detection(const MotRow& r) {
    cloud::Detection d;
    d.frame = r.frame;
    d.class_id = r.class_id;
    d.left = r.left;
    d.top = r.top;
    d.width = r.width;
    d.height = r.height;
    d.confidence = r.confidence;
    return d;
}

inline std::map<int, std::vector<MotRow>> group_by_frame(const std::vector<MotRow>& rows) {
    std::map<int, std::vector<MotRow>> by_frame;
    for (const auto& r : rows) by_frame[r.frame].push_back(r);
    return by_frame;
}

} // namespace lasermot
