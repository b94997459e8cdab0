#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fox/errors.hpp"
#include "fox/stats.hpp"

namespace fox {

// One fitted ordinary-least-squares model. Coefficients are stored intercept
// first; an intercept column is always part of the design.
struct RegressionModel {
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  long n = 0;  // sample count
  int k = 0;   // coefficient count, intercept included
  double r_squared = 0.0;
  double adjusted_r_squared = 0.0;
  double sse = 0.0;
  double tss = 0.0;
  bool degenerate_target = false;  // TSS == 0 (constant y)
  std::string target_label;

  long degrees_of_freedom() const { return n - k; }
};

struct RStats {
  double tss = 0.0;
  double sse = 0.0;
  double r_squared = 0.0;
  double adjusted_r_squared = 0.0;
  bool degenerate_target = false;
};

struct FitDiagnostics {
  std::vector<double> t_values;
  std::vector<double> p_values;
  std::vector<double> fitted;     // Y-hat per sample
  std::vector<double> residuals;  // e = Y - Y-hat per sample
  // (theoretical standard-normal quantile, sorted standardized residual)
  std::vector<std::pair<double, double>> qq_pairs;
};

// TSS = sum (Y - Ybar)^2, SSE = sum (Y - Yhat)^2, R^2 = 1 - SSE/TSS,
// adjusted R^2 = 1 - SSE (n-1) / (TSS (n-k)). A constant target makes R^2
// undefined; it is reported as 0 with the degenerate flag set.
inline RStats r_stats(const std::vector<double>& y,
                      const std::vector<double>& y_hat, int k) {
  if (y.size() != y_hat.size())
    throw InvalidInput("r_stats: y and y_hat must have equal length");
  const long n = static_cast<long>(y.size());
  if (n <= k) throw InvalidInput("r_stats: need n > k");

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);

  RStats s;
  for (long i = 0; i < n; ++i) {
    const double d_tot = y[i] - mean;
    const double d_err = y[i] - y_hat[i];
    s.tss += d_tot * d_tot;
    s.sse += d_err * d_err;
  }
  if (s.tss == 0.0) {
    s.degenerate_target = true;
    return s;
  }
  s.r_squared = 1.0 - s.sse / s.tss;
  s.adjusted_r_squared =
      1.0 - (s.sse * static_cast<double>(n - 1)) /
                (s.tss * static_cast<double>(n - k));
  return s;
}

// Fits y = b0 + b1 x1 + ... by column-pivoted Householder QR (no explicit
// normal-equations inverse). Standard errors come from the unbiased residual
// variance SSE/(n-k) and the diagonal of (X'X)^{-1} recovered from the R
// factor.
inline RegressionModel fit(const std::vector<std::vector<double>>& X,
                           const std::vector<double>& y,
                           std::string target_label = {}) {
  const long n = static_cast<long>(y.size());
  if (n == 0) throw InvalidInput("fit: empty sample");
  const int features = X.empty() ? 0 : static_cast<int>(X[0].size());
  if (static_cast<long>(X.size()) != n)
    throw InvalidInput("fit: X and y must have the same number of rows");
  const int k = features + 1;
  if (n <= k)
    throw InsufficientDataError("insufficient data: n = " + std::to_string(n) +
                                    " rows for k = " + std::to_string(k) +
                                    " coefficients (need n > k)",
                                n, k);

  Eigen::MatrixXd design(n, k);
  Eigen::VectorXd target(n);
  for (long i = 0; i < n; ++i) {
    if (static_cast<int>(X[i].size()) != features)
      throw InvalidInput("fit: ragged design matrix");
    design(i, 0) = 1.0;
    for (int j = 0; j < features; ++j) {
      const double v = X[i][j];
      if (!std::isfinite(v))
        throw InvalidInput("fit: non-finite entry in X at row " +
                           std::to_string(i) + ", column " + std::to_string(j));
      design(i, j + 1) = v;
    }
    if (!std::isfinite(y[i]))
      throw InvalidInput("fit: non-finite entry in y at row " +
                         std::to_string(i));
    target(i) = y[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    const int dependent =
        static_cast<int>(qr.colsPermutation().indices()[qr.rank()]);
    const std::string which =
        dependent == 0 ? std::string("intercept")
                       : "column " + std::to_string(dependent - 1);
    throw CollinearError("collinear features: design matrix has rank " +
                             std::to_string(qr.rank()) + " < " +
                             std::to_string(k) + "; dependent " + which,
                         dependent);
  }

  const Eigen::VectorXd beta = qr.solve(target);
  const Eigen::VectorXd fitted = design * beta;

  std::vector<double> y_hat(fitted.data(), fitted.data() + n);
  const RStats stats = r_stats(y, y_hat, k);

  // (X'X)^{-1} = P (R'R)^{-1} P' with X P = Q R.
  const Eigen::MatrixXd r_factor = qr.matrixR()
                                       .topLeftCorner(k, k)
                                       .template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r_factor.triangularView<Eigen::Upper>().solve(
          Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd gram_inv_permuted = r_inv * r_inv.transpose();
  const Eigen::MatrixXd gram_inv = qr.colsPermutation() * gram_inv_permuted *
                                   qr.colsPermutation().transpose();

  const double sigma2 = stats.sse / static_cast<double>(n - k);

  RegressionModel model;
  model.coefficients.assign(beta.data(), beta.data() + k);
  model.standard_errors.resize(k);
  for (int j = 0; j < k; ++j)
    model.standard_errors[j] =
        std::sqrt(std::max(0.0, sigma2 * gram_inv(j, j)));
  model.n = n;
  model.k = k;
  model.r_squared = stats.r_squared;
  model.adjusted_r_squared = stats.adjusted_r_squared;
  model.sse = stats.sse;
  model.tss = stats.tss;
  model.degenerate_target = stats.degenerate_target;
  model.target_label = std::move(target_label);
  return model;
}

// Y-hat = b0 + sum_i b_i x_i, summed left to right.
inline double predict(const RegressionModel& model,
                      const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != model.k - 1)
    throw InvalidInput("predict: expected " + std::to_string(model.k - 1) +
                       " features, got " + std::to_string(x.size()));
  double y = model.coefficients[0];
  for (std::size_t i = 0; i < x.size(); ++i)
    y += model.coefficients[i + 1] * x[i];
  return y;
}

// t_i = b_i / S_i. A zero standard error yields 0 when the coefficient is
// also zero and a signed infinity sentinel otherwise.
inline std::vector<double> t_values(const RegressionModel& model) {
  std::vector<double> t(model.coefficients.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double beta = model.coefficients[i];
    const double se = model.standard_errors[i];
    if (se == 0.0) {
      t[i] = beta == 0.0 ? 0.0
                         : std::copysign(
                               std::numeric_limits<double>::infinity(), beta);
    } else {
      t[i] = beta / se;
    }
  }
  return t;
}

inline std::vector<double> p_values(const std::vector<double>& t, double df) {
  std::vector<double> p(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    p[i] = student_t_two_sided_p(t[i], df);
  return p;
}

// Pairs sorted inputs with standard-normal quantiles at (i - 0.5)/n.
// The inputs are assumed already standardized.
inline std::vector<std::pair<double, double>> normal_qq_pairs(
    std::vector<double> standardized) {
  std::sort(standardized.begin(), standardized.end());
  const std::size_t n = standardized.size();
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    pairs.emplace_back(normal_quantile(q), standardized[i]);
  }
  return pairs;
}

// Residuals e_i = Y_i - Yhat_i, coefficient t/p statistics, and the Q-Q
// pairing of standardized residuals (standardized by sqrt(SSE/(n-k)))
// against standard-normal quantiles.
inline FitDiagnostics residual_report(const RegressionModel& model,
                                      const std::vector<std::vector<double>>& X,
                                      const std::vector<double>& y) {
  const long n = static_cast<long>(y.size());
  if (static_cast<long>(X.size()) != n)
    throw InvalidInput("residual_report: X and y must have equal rows");

  FitDiagnostics diag;
  diag.t_values = t_values(model);
  diag.p_values = p_values(diag.t_values,
                           static_cast<double>(model.degrees_of_freedom()));
  diag.fitted.resize(n);
  diag.residuals.resize(n);
  for (long i = 0; i < n; ++i) {
    diag.fitted[i] = predict(model, X[i]);
    diag.residuals[i] = y[i] - diag.fitted[i];
  }

  // An interpolating fit leaves SSE at rounding level; standardizing would
  // divide noise by noise, so such residuals are reported as exactly zero.
  const bool interpolating = model.sse <= 1e-20 * std::max(model.tss, 1.0);
  const double s =
      std::sqrt(model.sse / static_cast<double>(model.degrees_of_freedom()));
  std::vector<double> standardized(n, 0.0);
  if (!interpolating && s > 0.0)
    for (long i = 0; i < n; ++i) standardized[i] = diag.residuals[i] / s;
  diag.qq_pairs = normal_qq_pairs(std::move(standardized));
  return diag;
}

}  // namespace fox
