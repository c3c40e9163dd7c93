#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "heatlab/opnorm.hpp"

namespace heatlab {

/// Shortest decimal that reads back to the same double.
inline std::string shortest(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) return "nan";
    return std::string(buf, res.ptr);
}

/// 17 significant digits.
inline std::string sig17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV field quoting for strings that contain separators.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

/// Kernel dump rows "x,y,value". Zeros are skipped when `sparse` is set.
inline void write_kernel_csv(std::ostream& os, const KernelOperator& T, bool sparse = false) {
    os << "x,y,value\n";
    for (Index x = 0; x < T.K.rows(); ++x)
        for (Index y = 0; y < T.K.cols(); ++y) {
            if (sparse && T.K(x, y) == 0.0) continue;
            os << x << ',' << y << ',' << sig17(T.K(x, y)) << '\n';
        }
}

struct NormRow {
    std::string label;
    double p = 1, q = 1, gamma = 0, t = 0;
    double value = 0;
    NormMode mode = NormMode::exact;
};

inline void write_norm_rows(std::ostream& os, const std::vector<NormRow>& rows) {
    os << "label,p,q,gamma,t,value,mode\n";
    for (const NormRow& r : rows)
        os << csv_field(r.label) << ',' << shortest(r.p) << ',' << shortest(r.q) << ',' << shortest(r.gamma) << ','
           << shortest(r.t) << ',' << shortest(r.value) << ',' << mode_name(r.mode) << '\n';
}

} // namespace heatlab
