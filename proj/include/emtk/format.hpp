#pragma once

#include <cstdio>
#include <string>

namespace emtk {

/// 17 significant digits: round-trips every double.
inline std::string fmt_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace emtk
