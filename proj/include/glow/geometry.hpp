#pragma once

#include <array>

namespace glow {

// Axis-aligned corners in normalized image coordinates.
struct Corners {
  double x1, y1, x2, y2;
};

// Pixel-space box in COCO convention: top-left corner plus extent.
struct PixelBox {
  double x, y, w, h;
};

/// Normalized center-form box. Coordinates are fractions of the image
/// width/height: 0 <= cx, cy <= 1 and 0 < w, h <= 1. Construction through
/// `BoundingBox::make` validates; zero-area boxes are rejected so IoU never
/// sees 0/0.
class BoundingBox {
 public:
  // Throws ValidationError when the invariants do not hold.
  static BoundingBox make(double cx, double cy, double w, double h);

  // Clamps the center into [0,1] and the extent into [min_extent,1].
  static BoundingBox clamped(double cx, double cy, double w, double h, double min_extent = 1e-6);

  double cx() const noexcept { return cx_; }
  double cy() const noexcept { return cy_; }
  double w() const noexcept { return w_; }
  double h() const noexcept { return h_; }
  double area() const noexcept { return w_ * h_; }

  Corners corners() const noexcept;
  std::array<double, 4> as_array() const noexcept { return {cx_, cy_, w_, h_}; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  BoundingBox(double cx, double cy, double w, double h) : cx_(cx), cy_(cy), w_(w), h_(h) {}

  double cx_, cy_, w_, h_;
};

double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

// Generalized IoU: iou - |hull \ union| / |hull|. Range (-1, 1].
double giou(const BoundingBox& a, const BoundingBox& b) noexcept;

// Sum of absolute coordinate differences over (cx, cy, w, h).
double l1_box(const BoundingBox& a, const BoundingBox& b) noexcept;

BoundingBox normalize(const PixelBox& px, double image_width, double image_height);
PixelBox denormalize(const BoundingBox& box, double image_width, double image_height) noexcept;

}  // namespace glow
