#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace treeforge {

/// Renders a double with the fewest digits that round-trip exactly.
/// Output always contains a '.' or an exponent so it re-lexes as a real
/// literal, never as an int.
std::string format_real(double value);

std::string format_int(std::int64_t value);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

} // namespace treeforge
