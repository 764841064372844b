#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvd/disk2d.hpp"
#include "mvd/rng.hpp"

namespace mvd {

// Pointflow: a learning-free subpixel contour integrator. Random points
// flow along potential fields derived from the blurred image gradient,
//
//   V_a = grad ||grad I_b||,  V_r = perp(grad I_b),  V_pm = (V_a +- V_r)/2,
//
// until a trajectory loops on an edge; looped trajectories become closed
// contours from which the disk radius (arc length / 2pi) and center
// (least-squares circle fit) are estimated.

struct estimation_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct degenerate_geometry : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0, y = 0.0;
};

struct PointflowConfig {
  double sigma_pf = 5.0;   // field blur
  double dt = 50.0;        // Euler step
  double tau_l = 0.9;      // loop threshold, squared pixels
  double tau_s = 1e-6;     // stuck threshold on ||V||^2
  double tau_len = 0.001;  // minimum trajectory arc length
  int n_iters = 1000;      // max flow steps (N_i)
  int n_seeds = 200;       // seed points per image (N_pf)

  void validate() const {
    if (sigma_pf <= 0 || dt <= 0 || tau_l <= 0 || tau_s <= 0 || tau_len <= 0 || n_iters <= 0 ||
        n_seeds <= 0)
      throw std::invalid_argument("PointflowConfig: all parameters must be positive");
  }
};

// Two-channel vector field on the pixel grid with a bilinear sampler.
// Queries clamp to the border, but the flow itself never evaluates outside
// the domain (leaving the domain terminates a trajectory first).
class FlowField {
 public:
  FlowField(std::size_t dim, std::vector<double> vx, std::vector<double> vy)
      : dim_(dim), vx_(std::move(vx)), vy_(std::move(vy)) {
    if (vx_.size() != dim_ * dim_ || vy_.size() != dim_ * dim_)
      throw std::invalid_argument("FlowField: channel size mismatch");
  }

  std::size_t dim() const { return dim_; }
  double half_extent() const { return (static_cast<double>(dim_) - 1.0) / 2.0; }

  Vec2 at_pixel(std::size_t row, std::size_t col) const {
    return {vx_[row * dim_ + col], vy_[row * dim_ + col]};
  }

  Vec2 sample(Vec2 p) const {
    const double half = half_extent();
    const double col = std::clamp(p.x + half, 0.0, static_cast<double>(dim_ - 1));
    const double row = std::clamp(half - p.y, 0.0, static_cast<double>(dim_ - 1));
    const auto r0 = static_cast<std::size_t>(row);
    const auto c0 = static_cast<std::size_t>(col);
    const std::size_t r1 = std::min(r0 + 1, dim_ - 1);
    const std::size_t c1 = std::min(c0 + 1, dim_ - 1);
    const double fr = row - static_cast<double>(r0);
    const double fc = col - static_cast<double>(c0);
    const double w00 = (1 - fr) * (1 - fc), w01 = (1 - fr) * fc;
    const double w10 = fr * (1 - fc), w11 = fr * fc;
    const std::size_t i00 = r0 * dim_ + c0, i01 = r0 * dim_ + c1;
    const std::size_t i10 = r1 * dim_ + c0, i11 = r1 * dim_ + c1;
    return {w00 * vx_[i00] + w01 * vx_[i01] + w10 * vx_[i10] + w11 * vx_[i11],
            w00 * vy_[i00] + w01 * vy_[i01] + w10 * vy_[i10] + w11 * vy_[i11]};
  }

 private:
  std::size_t dim_;
  std::vector<double> vx_, vy_;
};

enum class Termination { Loop, OutOfDomain, Stuck, MaxIter };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::Loop: return "loop";
    case Termination::OutOfDomain: return "out_of_domain";
    case Termination::Stuck: return "stuck";
    default: return "max_iter";
  }
}

struct Trajectory {
  std::vector<Vec2> points;
  Termination termination = Termination::MaxIter;
  std::ptrdiff_t loop_start = -1;  // index of the revisited point, when Loop

  double arc_length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
      len += std::hypot(points[i].x - points[i - 1].x, points[i].y - points[i - 1].y);
    return len;
  }
};

// Closed polyline; the closing segment from last back to first is part of
// its length.
struct Contour {
  std::vector<Vec2> points;

  double closed_length() const {
    if (points.size() < 2) return 0.0;
    double len = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
      len += std::hypot(points[i].x - points[i - 1].x, points[i].y - points[i - 1].y);
    len += std::hypot(points.front().x - points.back().x, points.front().y - points.back().y);
    return len;
  }
};

namespace detail {

// Central differences with clamped (replicate) borders; y grows upward, so
// the row difference is negated.
inline void gradient(const Image& img, std::vector<double>& gx, std::vector<double>& gy) {
  const std::size_t d = img.dim;
  gx.resize(d * d);
  gy.resize(d * d);
  for (std::size_t row = 0; row < d; ++row) {
    const std::size_t rm = row == 0 ? 0 : row - 1;
    const std::size_t rp = row + 1 == d ? d - 1 : row + 1;
    for (std::size_t col = 0; col < d; ++col) {
      const std::size_t cm = col == 0 ? 0 : col - 1;
      const std::size_t cp = col + 1 == d ? d - 1 : col + 1;
      gx[row * d + col] = (img.at(row, cp) - img.at(row, cm)) / 2.0;
      gy[row * d + col] = (img.at(rm, col) - img.at(rp, col)) / 2.0;
    }
  }
}

}  // namespace detail

// Build V_+ and V_- for an image: blur with sigma_pf (same kernel
// discretization as the dataset degradation), central-difference gradients,
// V_r as the +90 degree rotation (gx, gy) -> (-gy, gx).
inline std::pair<FlowField, FlowField> compute_fields(const Image& img,
                                                      const PointflowConfig& cfg) {
  cfg.validate();
  const std::size_t d = img.dim;
  const Image blurred = gaussian_blur(img, cfg.sigma_pf);
  std::vector<double> gx, gy;
  detail::gradient(blurred, gx, gy);
  Image magnitude(d);
  for (std::size_t i = 0; i < d * d; ++i)
    magnitude.pixels[i] = std::hypot(gx[i], gy[i]);
  std::vector<double> ax, ay;
  detail::gradient(magnitude, ax, ay);
  std::vector<double> px(d * d), py(d * d), mx(d * d), my(d * d);
  for (std::size_t i = 0; i < d * d; ++i) {
    const double rx = -gy[i], ry = gx[i];
    px[i] = 0.5 * (ax[i] + rx);
    py[i] = 0.5 * (ay[i] + ry);
    mx[i] = 0.5 * (ax[i] - rx);
    my[i] = 0.5 * (ay[i] - ry);
  }
  return {FlowField(d, std::move(px), std::move(py)), FlowField(d, std::move(mx), std::move(my))};
}

// Forward-Euler flow P_{n+1} = P_n + dt V(P_n) with the three stopping
// conditions:
//   stuck:  ||V(P_n)||^2 <= tau_s (checked before stepping)
//   out:    the next point leaves [-(D-1)/2, (D-1)/2]^2
//   loop:   the new point lands within squared distance tau_l of an earlier
//           point of this trajectory, with at least one intermediate point
//           at squared distance >= tau_l from both ends (which rules out
//           matching against the immediately preceding points).
// Loop search prefers the earliest matching point, so the looped segment is
// the longest one.
inline Trajectory flow(Vec2 start, const FlowField& field, const PointflowConfig& cfg) {
  cfg.validate();
  const double half = field.half_extent();
  if (std::abs(start.x) > half || std::abs(start.y) > half)
    throw std::invalid_argument("flow: start point outside the image domain");

  Trajectory traj;
  traj.points.reserve(64);
  traj.points.push_back(start);
  // Bounding box of the trajectory so far: when every point is closer than
  // tau_l to the current one there can be no valid intermediate point, and
  // the loop scan can be skipped outright.
  double min_x = start.x, max_x = start.x, min_y = start.y, max_y = start.y;

  for (int it = 0; it < cfg.n_iters; ++it) {
    const Vec2 here = traj.points.back();
    const Vec2 v = field.sample(here);
    if (v.x * v.x + v.y * v.y <= cfg.tau_s) {
      traj.termination = Termination::Stuck;
      return traj;
    }
    const Vec2 nxt{here.x + cfg.dt * v.x, here.y + cfg.dt * v.y};
    if (std::abs(nxt.x) > half || std::abs(nxt.y) > half) {
      traj.termination = Termination::OutOfDomain;
      return traj;
    }
    traj.points.push_back(nxt);
    min_x = std::min(min_x, nxt.x);
    max_x = std::max(max_x, nxt.x);
    min_y = std::min(min_y, nxt.y);
    max_y = std::max(max_y, nxt.y);

    const double span_x = std::max(std::abs(nxt.x - min_x), std::abs(max_x - nxt.x));
    const double span_y = std::max(std::abs(nxt.y - min_y), std::abs(max_y - nxt.y));
    if (span_x * span_x + span_y * span_y < cfg.tau_l) continue;

    const std::size_t n = traj.points.size() - 1;  // index of nxt
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double dxj = traj.points[j].x - nxt.x;
      const double dyj = traj.points[j].y - nxt.y;
      if (dxj * dxj + dyj * dyj > cfg.tau_l) continue;
      for (std::size_t m = j + 1; m < n; ++m) {
        const double am = traj.points[m].x - traj.points[j].x;
        const double bm = traj.points[m].y - traj.points[j].y;
        if (am * am + bm * bm < cfg.tau_l) continue;
        const double cm = traj.points[m].x - nxt.x;
        const double dm = traj.points[m].y - nxt.y;
        if (cm * cm + dm * dm >= cfg.tau_l) {
          traj.termination = Termination::Loop;
          traj.loop_start = static_cast<std::ptrdiff_t>(j);
          return traj;
        }
      }
    }
  }
  traj.termination = Termination::MaxIter;
  return traj;
}

namespace detail {

// The contour kept from a looped reflow: the point subsequence from the
// loop start to the trajectory end, if it is a usable polygon.
inline bool contour_from_loop(const Trajectory& traj, double tau_len, Contour& out) {
  if (traj.termination != Termination::Loop || traj.loop_start < 0) return false;
  const auto begin = traj.points.begin() + traj.loop_start;
  if (traj.points.end() - begin < 3) return false;
  out.points.assign(begin, traj.points.end());
  return out.closed_length() > tau_len;
}

}  // namespace detail

// Contour integration: seed n_seeds uniform points, flow along V_+; loops
// are reflown along V_+ to isolate the closed contour; domain exits are
// reflown along V_- (twice, when the first reflow loops). Everything else
// is discarded. The seed draw order is x then y per point.
inline std::vector<Contour> integrate_contours(const Image& img, const PointflowConfig& cfg,
                                               Rng& rng) {
  cfg.validate();
  const auto [v_plus, v_minus] = compute_fields(img, cfg);
  const double half = v_plus.half_extent();
  std::vector<Contour> contours;
  for (int i = 0; i < cfg.n_seeds; ++i) {
    const double x = rng.uniform(-half, half);
    const double y = rng.uniform(-half, half);
    const Trajectory first = flow({x, y}, v_plus, cfg);
    if (first.termination == Termination::Loop && first.arc_length() >= cfg.tau_len) {
      const Trajectory reflow = flow(first.points.back(), v_plus, cfg);
      Contour c;
      if (detail::contour_from_loop(reflow, cfg.tau_len, c)) contours.push_back(std::move(c));
    } else if (first.termination == Termination::OutOfDomain &&
               first.arc_length() >= cfg.tau_len) {
      const Trajectory back = flow(first.points.back(), v_minus, cfg);
      if (back.termination == Termination::Loop && back.arc_length() >= cfg.tau_len) {
        const Trajectory reflow = flow(back.points.back(), v_minus, cfg);
        Contour c;
        if (detail::contour_from_loop(reflow, cfg.tau_len, c)) contours.push_back(std::move(c));
      }
    }
  }
  return contours;
}

// Mean closed arc length over the contours, divided by 2 pi.
inline double estimate_radius(std::span<const Contour> contours) {
  if (contours.empty()) throw estimation_failure("estimate_radius: no contours");
  double total = 0.0;
  for (const auto& c : contours) total += c.closed_length();
  return total / static_cast<double>(contours.size()) / (2.0 * 3.141592653589793238462643383279502884);
}

struct CircleFit {
  Vec2 center;
  double theta3 = 0.0;  // r^2 - cx^2 - cy^2

  // Diagnostic radius from the fit; the benchmark estimator uses arc length
  // instead (this one did not perform better).
  double radius_from_theta3() const {
    return std::sqrt(std::max(0.0, theta3 + center.x * center.x + center.y * center.y));
  }
};

// Least squares on the circle equation theta1 x + theta2 y + theta3 =
// x^2 + y^2, solved by Householder QR of the n x 3 system; collinear points
// leave the system rank-deficient.
inline CircleFit fit_circle_ls(const Contour& contour) {
  const std::size_t n = contour.points.size();
  if (n < 3) throw degenerate_geometry("fit_circle_ls: need at least 3 points");
  // Columns of A: x, y, 1; rhs: x^2 + y^2.
  std::vector<double> a0(n), a1(n), a2(n, 1.0), b(n);
  double col_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a0[i] = contour.points[i].x;
    a1[i] = contour.points[i].y;
    b[i] = a0[i] * a0[i] + a1[i] * a1[i];
    col_scale = std::max({col_scale, std::abs(a0[i]), std::abs(a1[i]), 1.0});
  }
  double* cols[3] = {a0.data(), a1.data(), a2.data()};
  double rmat[3][3] = {};
  for (int k = 0; k < 3; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += cols[k][i] * cols[k][i];
    norm = std::sqrt(norm);
    if (norm <= 1e-12 * col_scale * std::sqrt(static_cast<double>(n)))
      throw degenerate_geometry("fit_circle_ls: collinear points");
    const double alpha = cols[k][k] > 0.0 ? -norm : norm;
    // Householder vector in place of column k below the diagonal.
    cols[k][k] -= alpha;
    double vnorm_sq = 0.0;
    for (std::size_t i = k; i < n; ++i) vnorm_sq += cols[k][i] * cols[k][i];
    if (vnorm_sq == 0.0) throw degenerate_geometry("fit_circle_ls: collinear points");
    for (int j = k + 1; j < 3; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += cols[k][i] * cols[j][i];
      const double factor = 2.0 * dot / vnorm_sq;
      for (std::size_t i = k; i < n; ++i) cols[j][i] -= factor * cols[k][i];
    }
    double dot_b = 0.0;
    for (std::size_t i = k; i < n; ++i) dot_b += cols[k][i] * b[i];
    const double factor_b = 2.0 * dot_b / vnorm_sq;
    for (std::size_t i = k; i < n; ++i) b[i] -= factor_b * cols[k][i];
    rmat[k][k] = alpha;
    for (int j = k + 1; j < 3; ++j) rmat[k][j] = cols[j][k];
  }
  if (std::abs(rmat[2][2]) <= 1e-9 * col_scale)
    throw degenerate_geometry("fit_circle_ls: collinear points");
  double theta[3];
  for (int k = 2; k >= 0; --k) {
    double acc = b[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < 3; ++j) acc -= rmat[k][j] * theta[j];
    theta[k] = acc / rmat[k][k];
  }
  return CircleFit{{theta[0] / 2.0, theta[1] / 2.0}, theta[2]};
}

// Mean of the per-contour circle-fit centers; degenerate contours are
// skipped, and it is an estimation failure if none survives.
inline Vec2 estimate_center(std::span<const Contour> contours) {
  if (contours.empty()) throw estimation_failure("estimate_center: no contours");
  double sx = 0.0, sy = 0.0;
  std::size_t count = 0;
  for (const auto& c : contours) {
    try {
      const auto fit = fit_circle_ls(c);
      sx += fit.center.x;
      sy += fit.center.y;
      ++count;
    } catch (const degenerate_geometry&) {
    }
  }
  if (count == 0) throw estimation_failure("estimate_center: no fittable contour");
  return {sx / static_cast<double>(count), sy / static_cast<double>(count)};
}

struct DiskEstimate {
  double radius = 0.0;
  Vec2 center;
  std::size_t n_contours = 0;
};

inline DiskEstimate estimate_disk(const Image& img, const PointflowConfig& cfg, Rng& rng) {
  const auto contours = integrate_contours(img, cfg, rng);
  if (contours.empty()) throw estimation_failure("estimate_disk: no contours found");
  DiskEstimate est;
  est.radius = estimate_radius(contours);
  est.center = estimate_center(contours);
  est.n_contours = contours.size();
  return est;
}

}  // namespace mvd
