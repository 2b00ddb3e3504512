#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace platefuse {

/// Plate-local coordinate in pixels, y pointing down.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Point2, Point2) = default;
};

inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Least-squares slope of the line through a set of character centers.
/// `slope` is meaningful only when `defined` is set.
struct SlopeEstimate {
  double slope = 0.0;
  std::size_t count = 0;
  bool defined = false;
};

/// Denominators (spread of x about its mean) below this are treated as a
/// vertical or single-point configuration.
inline constexpr double kSlopeDenominatorTolerance = 1e-9;

/// Fits y = a*x + b through `centers` and returns a.
///
/// a = (sum x_i y_i - n mean(x) mean(y)) / (sum x_i^2 - n mean(x)^2),
/// evaluated as sum (x_i - mean(x))(y_i - mean(y)) / sum (x_i - mean(x))^2,
/// which is the same quantity without the cancellation of the raw sums.
inline SlopeEstimate estimate_slope(std::span<const Point2> centers) {
  if (centers.empty()) throw std::invalid_argument("no character centers");
  for (const auto& p : centers) {
    if (!is_finite(p)) throw std::invalid_argument("invalid coordinate");
  }

  SlopeEstimate est;
  est.count = centers.size();
  if (centers.size() < 2) return est;

  const double n = static_cast<double>(centers.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& p : centers) {
    mean_x += p.x;
    mean_y += p.y;
  }
  mean_x /= n;
  mean_y /= n;

  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : centers) {
    const double dx = p.x - mean_x;
    sxy += dx * (p.y - mean_y);
    sxx += dx * dx;
  }
  if (sxx < kSlopeDenominatorTolerance) return est;

  est.slope = sxy / sxx;
  est.defined = true;
  return est;
}

inline double slope_to_angle(const SlopeEstimate& est) {
  if (!est.defined) throw std::invalid_argument("degenerate slope");
  return std::atan(est.slope);
}

/// Residual tilt measured on one frame; zero when the slope is degenerate so
/// the rotation state is carried forward unchanged.
inline double residual_angle(const SlopeEstimate& est) {
  return est.defined ? std::atan(est.slope) : 0.0;
}

inline constexpr double kMaxRectificationAngle = deg_to_rad(89.0);

/// Accumulated rectification of one plate stream.
struct RotationState {
  double alpha = 0.0;  // radians, applied to the next frame
  double beta = 0.0;   // last residual angle, radians
  std::uint64_t frame_index = 0;
};

/// alpha' = clamp(alpha + beta) to +/-89 degrees.
inline RotationState update_rotation(const RotationState& state, double beta) {
  if (!std::isfinite(state.alpha) || !std::isfinite(state.beta)) {
    throw std::invalid_argument("invalid rotation state");
  }
  if (!std::isfinite(beta)) throw std::invalid_argument("invalid angle");
  RotationState next;
  next.alpha = std::clamp(state.alpha + beta, -kMaxRectificationAngle, kMaxRectificationAngle);
  next.beta = beta;
  next.frame_index = state.frame_index + 1;
  return next;
}

/// Rotates `p` by `angle` radians about `pivot` using the standard rotation
/// matrix in x-right/y-down axes.
inline Point2 rotate_about(Point2 p, double angle, Point2 pivot) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Point2 d = p - pivot;
  return {pivot.x + c * d.x - s * d.y, pivot.y + s * d.x + c * d.y};
}

/// Maps raw centers into the rectified plate frame by rotating them by
/// -alpha about `pivot`.
inline std::vector<Point2> rectify_points(std::span<const Point2> centers, double alpha,
                                          Point2 pivot) {
  if (!std::isfinite(alpha)) throw std::invalid_argument("invalid angle");
  std::vector<Point2> out;
  out.reserve(centers.size());
  for (const auto& p : centers) out.push_back(rotate_about(p, -alpha, pivot));
  return out;
}

}  // namespace platefuse
