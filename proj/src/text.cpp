#include "treeforge/text.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace treeforge {

std::string format_real(double value) {
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value < 0 ? "-inf" : "inf";
    char buf[64];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value)
            break;
    }
    std::string out(buf);
    // %g switches to scientific notation early (10.0 -> "1e+01"); prefer the
    // plain decimal whenever the magnitude keeps it short.
    double magnitude = std::fabs(value);
    if (out.find('e') != std::string::npos && magnitude >= 1e-4 && magnitude < 1e17) {
        for (int decimals = 0; decimals <= 21; ++decimals) {
            std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
            if (std::strtod(buf, nullptr) == value) {
                out = buf;
                break;
            }
        }
    }
    if (out.find('.') == std::string::npos && out.find('e') == std::string::npos &&
        out.find("inf") == std::string::npos && out.find("nan") == std::string::npos)
        out += ".0";
    return out;
}

std::string format_int(std::int64_t value) {
    return std::to_string(value);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0)
            out += sep;
        out += parts[i];
    }
    return out;
}

} // namespace treeforge
