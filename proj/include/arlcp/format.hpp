#pragma once

#include <cstdio>
#include <string>

namespace arlcp {

// All reals in output files carry 9 decimal digits, '.' separator.
inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

}  // namespace arlcp
