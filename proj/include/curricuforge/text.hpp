#pragma once

#include <charconv>
#include <string>

namespace curricuforge {

// The one float formatter for every text artifact: shortest round-trip
// decimal form, '.' separator, locale-free, so equal values always
// serialize to equal bytes.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace curricuforge
