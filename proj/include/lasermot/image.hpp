#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lasermot/error.hpp"

namespace lasermot::imaging {

// 8-bit grayscale image, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;

    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(check_dims(w, h), fill) {}

    GrayImage(int w, int h, std::vector<std::uint8_t> px)
        : width(w), height(h), pixels(std::move(px)) {
        if (pixels.size() != check_dims(w, h))
            throw contract_error("pixel count does not match dimensions");
    }

    std::uint8_t at(int row, int col) const {
        return pixels[static_cast<size_t>(row) * static_cast<size_t>(width) +
                      static_cast<size_t>(col)];
    }
    std::uint8_t& at(int row, int col) {
        return pixels[static_cast<size_t>(row) * static_cast<size_t>(width) +
                      static_cast<size_t>(col)];
    }

    bool operator==(const GrayImage& o) const = default;

private:
    static size_t check_dims(int w, int h) {
        if (w < 1 || h < 1) throw contract_error("image dimensions must be >= 1");
        return static_cast<size_t>(w) * static_cast<size_t>(h);
    }
};

namespace detail {

// PGM headers separate tokens by whitespace; '#' starts a comment that
// runs to end of line.
inline std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            if (!tok.empty()) break;
        } else {
            tok.push_back(static_cast<char>(c));
            const int peek = in.peek();
            if (peek == EOF || std::isspace(peek) || peek == '#') {
                break;
            }
        }
        c = in.get();
    }
    return tok;
}

inline int parse_pgm_int(const std::string& tok, const char* what) {
    if (tok.empty()) throw format_error(std::string("PGM header: missing ") + what);
    for (char c : tok)
        if (c < '0' || c > '9')
            throw format_error(std::string("PGM header: bad ") + what + " '" + tok + "'");
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw format_error(std::string("PGM header: bad ") + what + " '" + tok + "'");
    }
}

} // namespace detail

// Binary PGM (magic "P5"), maxval 255 only.
inline GrayImage load_pgm(std::istream& in) {
    const std::string magic = detail::next_pgm_token(in);
    if (magic != "P5") throw format_error("expected binary PGM magic 'P5', got '" + magic + "'");
    const int w = detail::parse_pgm_int(detail::next_pgm_token(in), "width");
    const int h = detail::parse_pgm_int(detail::next_pgm_token(in), "height");
    const int maxval = detail::parse_pgm_int(detail::next_pgm_token(in), "maxval");
    if (w < 1 || h < 1) throw format_error("PGM dimensions must be >= 1");
    if (maxval != 255) throw format_error("only maxval 255 PGM is supported");

    // Exactly one whitespace byte separates the header from the raster.
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep)) throw format_error("PGM header not followed by raster");

    GrayImage img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<size_t>(in.gcount()) != img.pixels.size())
        throw format_error("PGM raster truncated: expected " + std::to_string(img.pixels.size()) +
                           " bytes, got " + std::to_string(in.gcount()));
    return img;
}

inline GrayImage load_pgm(const std::string& bytes) {
    std::istringstream in(bytes);
    return load_pgm(in);
}

inline void save_pgm(const GrayImage& img, std::ostream& out) {
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
}

inline std::string save_pgm(const GrayImage& img) {
    std::ostringstream out;
    save_pgm(img, out);
    return out.str();
}

} // namespace lasermot::imaging
