#pragma once

#include <fstream>
#include <sstream>
#include <string>

namespace testutil {

inline std::string fixtures_dir() { return DILI_FIXTURES_DIR; }
inline std::string golden_dir() { return DILI_GOLDEN_DIR; }
inline std::string prompts_dir() { return DILI_PROMPTS_DIR; }

inline std::string fixture(const std::string& name) { return fixtures_dir() + "/" + name; }
inline std::string golden(const std::string& name) { return golden_dir() + "/" + name; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace testutil
