#include "glow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glow/error.hpp"

namespace glow {

BoundingBox BoundingBox::make(double cx, double cy, double w, double h) {
  const bool ok = std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h) &&
                  cx >= 0.0 && cx <= 1.0 && cy >= 0.0 && cy <= 1.0 && w > 0.0 && w <= 1.0 &&
                  h > 0.0 && h <= 1.0;
  if (!ok) {
    std::ostringstream msg;
    msg << "invalid box (cx=" << cx << ", cy=" << cy << ", w=" << w << ", h=" << h << ")";
    throw ValidationError(msg.str());
  }
  return BoundingBox(cx, cy, w, h);
}

BoundingBox BoundingBox::clamped(double cx, double cy, double w, double h, double min_extent) {
  return make(std::clamp(cx, 0.0, 1.0), std::clamp(cy, 0.0, 1.0), std::clamp(w, min_extent, 1.0),
              std::clamp(h, min_extent, 1.0));
}

Corners BoundingBox::corners() const noexcept {
  return {cx_ - 0.5 * w_, cy_ - 0.5 * h_, cx_ + 0.5 * w_, cy_ + 0.5 * h_};
}

namespace {

double intersection_area(const Corners& a, const Corners& b) noexcept {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

// Areas from the same corners as the intersection, so iou(a, a) is exactly 1.
double corner_area(const Corners& c) noexcept { return (c.x2 - c.x1) * (c.y2 - c.y1); }

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const Corners ca = a.corners();
  const Corners cb = b.corners();
  const double inter = intersection_area(ca, cb);
  const double uni = corner_area(ca) + corner_area(cb) - inter;
  return inter / uni;
}

double giou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const Corners ca = a.corners();
  const Corners cb = b.corners();
  const double inter = intersection_area(ca, cb);
  const double uni = corner_area(ca) + corner_area(cb) - inter;
  const double hull =
      (std::max(ca.x2, cb.x2) - std::min(ca.x1, cb.x1)) * (std::max(ca.y2, cb.y2) - std::min(ca.y1, cb.y1));
  // hull >= uni holds exactly; rounding can flip it for nested boxes.
  return inter / uni - std::max(0.0, hull - uni) / hull;
}

double l1_box(const BoundingBox& a, const BoundingBox& b) noexcept {
  return std::abs(a.cx() - b.cx()) + std::abs(a.cy() - b.cy()) + std::abs(a.w() - b.w()) +
         std::abs(a.h() - b.h());
}

BoundingBox normalize(const PixelBox& px, double image_width, double image_height) {
  if (!(image_width > 0.0) || !(image_height > 0.0)) {
    throw ValidationError("image dimensions must be positive");
  }
  return BoundingBox::make((px.x + 0.5 * px.w) / image_width, (px.y + 0.5 * px.h) / image_height,
                           px.w / image_width, px.h / image_height);
}

PixelBox denormalize(const BoundingBox& box, double image_width, double image_height) noexcept {
  const double w = box.w() * image_width;
  const double h = box.h() * image_height;
  return {box.cx() * image_width - 0.5 * w, box.cy() * image_height - 0.5 * h, w, h};
}

}  // namespace glow
