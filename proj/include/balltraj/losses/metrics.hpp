#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "balltraj/losses/losses.hpp"

namespace balltraj::losses {

struct MetricsReport {
  double pe = 0.0;
  double rl = 0.0;
  double ppa = 0.0;
  double tpa = 0.0;

  std::string to_key_value() const {
    std::ostringstream os;
    os << std::setprecision(6) << "pe=" << pe << "\nrl=" << rl << "\nppa=" << ppa << "\ntpa=" << tpa << "\n";
    return os.str();
  }
  static std::string csv_header() { return "pe,rl,ppa,tpa"; }
  std::string csv_row() const {
    std::ostringstream os;
    os << std::setprecision(6) << pe << ',' << rl << ',' << ppa << ',' << tpa;
    return os.str();
  }
};

struct PossessionAccuracy {
  double ppa = 0.0;
  double tpa = 0.0;
};

inline int argmax_row(const MatrixD& m, Eigen::Index r) {
  Eigen::Index best = 0;
  m.row(r).maxCoeff(&best);
  return static_cast<int>(best);
}

// team_of[k] is the team of class k (1, 2, or 0 for ball-out agents).
inline PossessionAccuracy possession_accuracy(const MatrixD& probs, const std::vector<int>& labels,
                                              const std::vector<int>& team_of) {
  if (static_cast<Eigen::Index>(labels.size()) != probs.rows()) throw ShapeError("possession_accuracy: label count");
  if (static_cast<Eigen::Index>(team_of.size()) != probs.cols()) throw ShapeError("possession_accuracy: team map");
  PossessionAccuracy acc;
  if (labels.empty()) return acc;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const int q = labels[t];
    if (q < 0 || q >= static_cast<int>(team_of.size())) throw LabelError("possession_accuracy: unknown agent");
    const int p = argmax_row(probs, static_cast<Eigen::Index>(t));
    if (p == q) acc.ppa += 1.0;
    if (team_of[static_cast<std::size_t>(p)] == team_of[static_cast<std::size_t>(q)]) acc.tpa += 1.0;
  }
  acc.ppa /= static_cast<double>(labels.size());
  acc.tpa /= static_cast<double>(labels.size());
  return acc;
}

}  // namespace balltraj::losses
