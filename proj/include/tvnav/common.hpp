#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace tvnav {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Malformed or semantically invalid configuration input.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A requested exhaustive computation exceeds its configured size limit.
struct EnumerationLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Axis-aligned rectangle with inclusive bounds, used for obstacles and the
/// workspace boundary.
struct Box {
    Vec2 lo = Vec2::Zero();
    Vec2 hi = Vec2::Zero();

    [[nodiscard]] bool contains(const Vec2& p) const {
        return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
    }

    /// Closest point of the box to p (p itself when inside).
    [[nodiscard]] Vec2 nearest_point(const Vec2& p) const {
        return Vec2(std::clamp(p.x(), lo.x(), hi.x()), std::clamp(p.y(), lo.y(), hi.y()));
    }
};

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace tvnav
