#pragma once

#include <cmath>

namespace risctl {

// Planar point/vector in meters, local frame.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace risctl
