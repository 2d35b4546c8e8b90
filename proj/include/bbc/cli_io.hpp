#pragma once

// Whole-file IO in binary mode. Outputs are compared byte-for-byte in
// golden tests, so no newline translation anywhere.

#include <filesystem>
#include <fstream>

#include "bbc/bytes.hpp"

namespace bbc::cli {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("short write: " + path.string());
}

}  // namespace bbc::cli
