#pragma once

#include <algorithm>
#include <optional>

namespace rpmkit {

// Axis-aligned box, half-open [x, x+w) x [y, y+h). Positive area by
// convention; producers are responsible for never emitting w <= 0 or h <= 0.
struct Box {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    double x2() const { return x + w; }
    double y2() const { return y + h; }

    bool operator==(const Box& o) const { return x == o.x && y == o.y && w == o.w && h == o.h; }
};

// Continuous-geometry intersection over union.
inline double iou(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.x2(), b.x2()) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y2(), b.y2()) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

// Intersects the box with [0, width) x [0, height). Empty result when the
// box lies fully outside the frame.
inline std::optional<Box> clip_to_frame(const Box& b, double width, double height) {
    const double x1 = std::max(0.0, b.x);
    const double y1 = std::max(0.0, b.y);
    const double x2 = std::min(width, b.x2());
    const double y2 = std::min(height, b.y2());
    if (x2 - x1 <= 0.0 || y2 - y1 <= 0.0)
        return std::nullopt;
    return Box{x1, y1, x2 - x1, y2 - y1};
}

} // namespace rpmkit
