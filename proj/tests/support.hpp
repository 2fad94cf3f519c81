#pragma once

#include <fstream>
#include <sstream>
#include <string>

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::string data_path(const std::string& name) { return std::string(OSFP_DATA_DIR) + "/" + name; }
