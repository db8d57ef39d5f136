#pragma once

#include <cstdio>
#include <string>

namespace orthostat {

/// Shortest exact decimal rendering of a double (round-trips bit-exactly);
/// keeps CSV output byte-identical across runs.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double parsed = 0.0;
    // prefer shorter representations when they round-trip
    for (int prec = 1; prec <= 16; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        std::sscanf(shorter, "%lf", &parsed);
        if (parsed == v) return shorter;
    }
    return buf;
}

}  // namespace orthostat
