#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "iapg/experiments.hpp"

namespace iapg {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

FiveNumber five_number_summary(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("five_number_summary: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return FiveNumber{sorted.front(), quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.5),
                    quantile_sorted(sorted, 0.75), sorted.back()};
}

AffineFit fit_affine(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_affine: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("fit_affine: need at least two points");
  const auto n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_affine: xs are degenerate");
  AffineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r_squared = 0.0;
  } else {
    double sse = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
      sse += e * e;
    }
    fit.r_squared = 1.0 - sse / syy;
  }
  return fit;
}

LogDecayFit fit_log_decay(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_log_decay: length mismatch");
  if (xs.size() < 4) throw std::invalid_argument("fit_log_decay: need at least four points");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0) || !(ys[i] > 0)) {
      throw std::invalid_argument("fit_log_decay: xs and ys must be positive");
    }
  }
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::VectorXd log_y(n);
  for (Eigen::Index i = 0; i < n; ++i) log_y[i] = std::log(ys[static_cast<std::size_t>(i)]);

  std::vector<double> candidates(xs.begin(), xs.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  LogDecayFit best;
  best.sse = std::numeric_limits<double>::infinity();
  for (const double c1 : candidates) {
    Eigen::MatrixXd design(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = std::log(std::max(c1, xs[static_cast<std::size_t>(i)]));
      design(i, 0) = 1.0;
      design(i, 1) = u > 0 ? std::max(0.0, std::log(u)) : 0.0;
      design(i, 2) = -u;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    Eigen::Vector3d coef = Eigen::Vector3d::Zero();
    if (qr.rank() == 3) {
      coef = qr.solve(log_y);
    } else {
      // ln ln term collinear with the others: drop it (a = 0).
      Eigen::MatrixXd reduced(n, 2);
      reduced.col(0) = design.col(0);
      reduced.col(1) = design.col(2);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr2(reduced);
      if (qr2.rank() < 2) continue;
      const Eigen::Vector2d c2 = qr2.solve(log_y);
      coef << c2[0], 0.0, c2[1];
    }
    const double sse = (design * coef - log_y).squaredNorm();
    if (sse < best.sse) {
      best.sse = sse;
      best.c = std::exp(coef[0]);
      best.c1 = c1;
      best.a = coef[1];
      best.b = coef[2];
    }
  }
  if (!std::isfinite(best.sse)) throw std::invalid_argument("fit_log_decay: degenerate xs");
  return best;
}

}  // namespace iapg
