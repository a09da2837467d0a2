#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lasermot/error.hpp"

namespace lasermot {

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path.string());
    out << content;
    if (!out) throw io_error("write failed for " + path.string());
}

} // namespace lasermot
