#pragma once

#include <Eigen/Dense>

#include <vector>

#include "balltraj/data/types.hpp"

namespace balltraj::apps {

// Projective map from pitch meters to image coordinates.
inline data::MatrixD apply_homography(const data::MatrixD& points, const Eigen::Matrix3d& h) {
  data::MatrixD out(points.rows(), 2);
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const Eigen::Vector3d p = h * Eigen::Vector3d(points(r, 0), points(r, 1), 1.0);
    if (std::abs(p.z()) < 1e-12) throw NumericError("homography maps a point to infinity");
    out(r, 0) = p.x() / p.z();
    out(r, 1) = p.y() / p.z();
  }
  return out;
}

// Fraction of frames whose true ball lies in the size x size box centred on
// the prediction, per box size.
inline std::vector<double> roi_accuracy(const data::MatrixD& pred, const data::MatrixD& truth,
                                        const std::vector<double>& sizes,
                                        const Eigen::Matrix3d& homography = Eigen::Matrix3d::Identity()) {
  if (pred.rows() != truth.rows() || pred.cols() != 2 || truth.cols() != 2) throw ShapeError("roi_accuracy: shapes");
  for (double b : sizes) {
    if (!(b > 0.0)) throw ConfigError("ROI box size must be positive");
  }
  const data::MatrixD p = apply_homography(pred, homography), y = apply_homography(truth, homography);
  std::vector<double> acc;
  for (double b : sizes) {
    int inside = 0;
    for (Eigen::Index t = 0; t < p.rows(); ++t) {
      inside += std::abs(p(t, 0) - y(t, 0)) <= b / 2.0 && std::abs(p(t, 1) - y(t, 1)) <= b / 2.0;
    }
    acc.push_back(p.rows() == 0 ? 1.0 : inside / static_cast<double>(p.rows()));
  }
  return acc;
}

}  // namespace balltraj::apps
