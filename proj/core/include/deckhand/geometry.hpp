#pragma once

#include <cmath>

namespace deckhand {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2& o) const = default;

    double norm() const { return std::sqrt(x * x + y * y); }

    Vec2 normalized() const {
        double n = norm();
        if (n == 0.0) return {0.0, 0.0};
        return {x / n, y / n};
    }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Axis-aligned rectangle, min corner inclusive.
struct Rect {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    bool contains(const Vec2& p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
    Vec2 center() const { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
};

}  // namespace deckhand
