// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "censtereo/camera.hpp"
#include "censtereo/image.hpp"

namespace censtereo {

// Sparse-evaluation metrics: validity is the fraction of evaluable pixels
// (mask set, ground truth finite) the predictor filled in; the accuracy
// numbers are conditioned on those filled-in pixels only, so discarding data
// trades density for the error metrics rather than being penalized twice.
struct MetricsReport {
  double bad05 = 0.0;  // fraction with |error| > 0.5 px
  double bad10 = 0.0;
  double bad20 = 0.0;
  double bad40 = 0.0;
  double a50 = 0.0;      // median |error|, px
  double avg_err = 0.0;  // mean |error|, px
  double rms_err = 0.0;  // root-mean-square error, px
  double validity = 0.0;
  long long evaluated_pixels = 0;  // mask set and gt finite
  long long valid_pixels = 0;      // of those, prediction valid
};

inline MetricsReport compute_metrics(const DisparityMap& pred,
                                     const RealMap& gt,
                                     const ValidityMask& eval_mask) {
  if (pred.width != gt.width || pred.height != gt.height ||
      pred.width != eval_mask.width || pred.height != eval_mask.height)
    throw std::invalid_argument("compute_metrics: dimension mismatch");

  std::vector<double> errors;
  long long evaluated = 0;
  for (int y = 0; y < pred.height; ++y)
    for (int x = 0; x < pred.width; ++x) {
      if (!eval_mask.at(x, y)) continue;
      const double g = gt.at(x, y);
      if (!std::isfinite(g)) continue;
      ++evaluated;
      const uint16_t v = pred.at(x, y);
      if (v == kInvalidDisparity) continue;
      errors.push_back(std::abs(fixed_to_float(v) - g));
    }
  if (evaluated == 0)
    throw std::invalid_argument("compute_metrics: no evaluable pixels");

  MetricsReport r;
  r.evaluated_pixels = evaluated;
  r.valid_pixels = (long long)errors.size();
  r.validity = double(errors.size()) / double(evaluated);
  if (errors.empty()) return r;  // error metrics are over the matched subset

  std::sort(errors.begin(), errors.end());
  const auto frac_above = [&](double t) {
    // strictly greater than t counts as bad
    const auto it = std::upper_bound(errors.begin(), errors.end(), t);
    return double(errors.end() - it) / double(errors.size());
  };
  r.bad05 = frac_above(0.5);
  r.bad10 = frac_above(1.0);
  r.bad20 = frac_above(2.0);
  r.bad40 = frac_above(4.0);
  r.a50 = errors[(errors.size() - 1) / 2];  // lower median
  double sum = 0.0, sum2 = 0.0;
  for (double e : errors) {
    sum += e;
    sum2 += e * e;
  }
  r.avg_err = sum / double(errors.size());
  r.rms_err = std::sqrt(sum2 / double(errors.size()));
  return r;
}

inline MetricsReport compute_metrics(const DisparityMap& pred,
                                     const RealMap& gt) {
  return compute_metrics(pred, gt, ValidityMask(pred.width, pred.height, true));
}

// ---------------------------------------------------------------------------
// Best-fit plane through a 3D point set.
// ---------------------------------------------------------------------------

struct PlaneFit {
  Point3 normal;  // unit
  double offset = 0.0;  // plane is normal . p = offset
  double rms = 0.0;     // root-mean-square point-to-plane distance, meters
};

// Least-squares plane via a one-sided Jacobi SVD of the centered n-by-3
// point matrix: rotations orthogonalize the three columns directly, which
// keeps the smallest singular value accurate in a relative sense — forming
// the 3x3 covariance first would square the condition number and turn an
// exactly planar cloud into rms ~ sqrt(machine epsilon).
inline PlaneFit plane_fit_rms(const std::vector<Point3>& points) {
  const size_t n = points.size();
  if (n < 3) throw std::invalid_argument("plane_fit_rms: need at least 3 points");

  Point3 centroid{0, 0, 0};
  for (const Point3& p : points) {
    centroid.x += p.x;
    centroid.y += p.y;
    centroid.z += p.z;
  }
  centroid.x /= double(n);
  centroid.y /= double(n);
  centroid.z /= double(n);

  // columns of the centered matrix
  std::array<std::vector<double>, 3> col;
  for (auto& c : col) c.resize(n);
  for (size_t i = 0; i < n; ++i) {
    col[0][i] = points[i].x - centroid.x;
    col[1][i] = points[i].y - centroid.y;
    col[2][i] = points[i].z - centroid.z;
  }

  double V[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const double tol = 1e-15;
  for (int sweep = 0; sweep < 30; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (size_t i = 0; i < n; ++i) {
          alpha += col[p][i] * col[p][i];
          beta += col[q][i] * col[q][i];
          gamma += col[p][i] * col[q][i];
        }
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (size_t i = 0; i < n; ++i) {
          const double a = col[p][i], b = col[q][i];
          col[p][i] = cs * a - sn * b;
          col[q][i] = sn * a + cs * b;
        }
        for (int k = 0; k < 3; ++k) {
          const double a = V[k][p], b = V[k][q];
          V[k][p] = cs * a - sn * b;
          V[k][q] = sn * a + cs * b;
        }
      }
    if (!rotated) break;
  }

  double sigma[3];
  for (int k = 0; k < 3; ++k) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += col[k][i] * col[k][i];
    sigma[k] = std::sqrt(s);
  }
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return sigma[a] < sigma[b]; });
  const int i_min = order[0], i_mid = order[1], i_max = order[2];
  // collinear or coincident points leave no unique plane
  if (sigma[i_max] <= 0.0 || sigma[i_mid] <= 1e-12 * sigma[i_max])
    throw std::invalid_argument("plane_fit_rms: degenerate point set");

  PlaneFit fit;
  fit.normal = Point3{V[0][i_min], V[1][i_min], V[2][i_min]};
  const double norm = std::sqrt(fit.normal.x * fit.normal.x +
                                fit.normal.y * fit.normal.y +
                                fit.normal.z * fit.normal.z);
  fit.normal.x /= norm;
  fit.normal.y /= norm;
  fit.normal.z /= norm;
  // deterministic orientation: largest component positive
  double big = fit.normal.x;
  if (std::abs(fit.normal.y) > std::abs(big)) big = fit.normal.y;
  if (std::abs(fit.normal.z) > std::abs(big)) big = fit.normal.z;
  if (big < 0.0) {
    fit.normal.x = -fit.normal.x;
    fit.normal.y = -fit.normal.y;
    fit.normal.z = -fit.normal.z;
  }
  fit.offset = fit.normal.x * centroid.x + fit.normal.y * centroid.y +
               fit.normal.z * centroid.z;
  fit.rms = sigma[i_min] / std::sqrt(double(n));
  return fit;
}

}  // namespace censtereo
