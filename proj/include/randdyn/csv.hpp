#pragma once

// Deterministic text output: floats via `%.17g` (value-exact round trip),
// `\n` line endings, and atomic file replacement (write to a temp file in
// the target directory, then rename), so readers never observe a torn file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "common.hpp"

namespace randdyn {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// short form for human-facing messages; CSV cells always use format_g17
inline std::string format_plain(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw ValidationError("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

}  // namespace randdyn
