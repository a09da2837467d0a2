#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lasermot/error.hpp"
#include "lasermot/image.hpp"

namespace lasermot::imaging {

// Real-valued log-intensity grid, same layout as GrayImage.
struct LogPlane {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    LogPlane() = default;

    LogPlane(int w, int h, double fill = 0.0)
        : width(w), height(h),
          values(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {
        if (w < 1 || h < 1) throw contract_error("plane dimensions must be >= 1");
    }

    double at(int row, int col) const {
        return values[static_cast<size_t>(row) * static_cast<size_t>(width) +
                      static_cast<size_t>(col)];
    }
    double& at(int row, int col) {
        return values[static_cast<size_t>(row) * static_cast<size_t>(width) +
                      static_cast<size_t>(col)];
    }

    double max_value() const { return *std::max_element(values.begin(), values.end()); }
    double min_value() const { return *std::min_element(values.begin(), values.end()); }
};

struct EnhanceParams {
    int passes_per_level = 1;   // iterations at each spatial offset
    double log_offset = 1.0;    // added before the log to avoid log 0

    void validate() const {
        if (passes_per_level < 1) throw contract_error("passes_per_level must be >= 1");
        if (!(log_offset > 0.0)) throw contract_error("log_offset must be positive");
    }
};

// Sweep direction: which neighbor feeds each pixel's update.
enum class Sweep { RowMinus, RowPlus, ColMinus, ColPlus };

// Descending power-of-two offsets, from the largest power of two that is
// at most max(width, height)/2 down to 1. Empty when no neighbor exists.
inline std::vector<int> spiral_offsets(int width, int height) {
    if (width < 1 || height < 1) throw contract_error("dimensions must be >= 1");
    const int longest = std::max(width, height);
    std::vector<int> offsets;
    int d = 1;
    while (2 * d <= longest / 2) d *= 2;
    if (longest >= 2)
        for (; d >= 1; d /= 2) offsets.push_back(d);
    return offsets;
}

// One directional propagation sweep at offset d. Each pixel whose offset
// neighbor is in bounds becomes the average of its old estimate and the
// propagated value g(neighbor) + f(here) - f(neighbor), clamped to the
// global maximum of f. Reads the previous plane, writes a fresh one.
inline LogPlane retinex_step(const LogPlane& g, const LogPlane& f, int d, Sweep direction) {
    if (g.width != f.width || g.height != f.height)
        throw contract_error("retinex_step: estimate and source dimensions differ");
    if (d < 1) throw contract_error("retinex_step: offset must be >= 1");

    int dr = 0, dc = 0;
    switch (direction) {
        case Sweep::RowMinus: dr = -d; break;
        case Sweep::RowPlus: dr = d; break;
        case Sweep::ColMinus: dc = -d; break;
        case Sweep::ColPlus: dc = d; break;
    }

    const double f_max = f.max_value();
    LogPlane out = g;
    for (int r = 0; r < g.height; ++r) {
        const int nr = r + dr;
        if (nr < 0 || nr >= g.height) continue;
        for (int c = 0; c < g.width; ++c) {
            const int nc = c + dc;
            if (nc < 0 || nc >= g.width) continue;
            const double propagated = g.at(nr, nc) + f.at(r, c) - f.at(nr, nc);
            out.at(r, c) = 0.5 * (g.at(r, c) + std::min(propagated, f_max));
        }
    }
    return out;
}

// Linear stretch of the final estimate to [0, 255], rounding half away
// from zero. A constant plane maps to all-128 by definition.
inline GrayImage normalize_minmax(const LogPlane& plane) {
    GrayImage img(plane.width, plane.height);
    const double lo = plane.min_value();
    const double hi = plane.max_value();
    if (hi == lo) {
        std::fill(img.pixels.begin(), img.pixels.end(), std::uint8_t{128});
        return img;
    }
    const double span = hi - lo;
    for (size_t i = 0; i < plane.values.size(); ++i) {
        const double stretched = (plane.values[i] - lo) / span * 255.0;
        img.pixels[i] = static_cast<std::uint8_t>(std::lround(stretched));
    }
    return img;
}

inline LogPlane to_log_plane(const GrayImage& img, double log_offset) {
    LogPlane f(img.width, img.height);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        f.values[i] = std::log(static_cast<double>(img.pixels[i]) + log_offset);
    return f;
}

// Full enhancement: log transform, estimate initialized to the source
// maximum, coarse-to-fine sweeps in the fixed order -row, +row, -col,
// +col at each offset, then the linear stretch.
inline GrayImage enhance(const GrayImage& img, const EnhanceParams& params = {}) {
    params.validate();
    const LogPlane f = to_log_plane(img, params.log_offset);
    LogPlane g(f.width, f.height, f.max_value());

    for (int d : spiral_offsets(img.width, img.height)) {
        for (int pass = 0; pass < params.passes_per_level; ++pass) {
            for (Sweep s : {Sweep::RowMinus, Sweep::RowPlus, Sweep::ColMinus, Sweep::ColPlus}) {
                g = retinex_step(g, f, d, s);
            }
        }
    }
    return normalize_minmax(g);
}

} // namespace lasermot::imaging
