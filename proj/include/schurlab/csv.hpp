#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "schurlab/densecore.hpp"

namespace schurlab::csv {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// CSV with "# key=value" metadata comment lines, fixed column order, and
/// %.17g doubles so reruns under a fixed seed are byte-identical.
class Writer {
public:
    void meta(const std::string& key, const std::string& value) {
        body_ << "# " << key << "=" << value << "\n";
    }

    void header(std::initializer_list<std::string> columns) { row_strings(columns); }

    void row_strings(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& c : cells) {
            if (!first) body_ << ",";
            body_ << c;
            first = false;
        }
        body_ << "\n";
    }

    void cell(const std::string& s) {
        if (!line_.empty()) line_ += ",";
        line_ += s;
    }
    void cell(double v) { cell(fmt(v)); }
    void cell(long v) { cell(std::to_string(v)); }
    void cell(int v) { cell(std::to_string(v)); }

    void end_row() {
        body_ << line_ << "\n";
        line_.clear();
    }

    std::string str() const { return body_.str(); }

    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error("cannot open for writing: " + path);
        os << body_.str();
    }

private:
    std::ostringstream body_;
    std::string line_;
};

} // namespace schurlab::csv
