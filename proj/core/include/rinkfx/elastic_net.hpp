#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "rinkfx/design.hpp"

namespace rinkfx {

/// sign(z) * max(|z| - g, 0)
double soft_threshold(double z, double g);

/// Elastic-net problem description. The objective, on internally
/// standardized columns (mean 0, variance 1) and centered response, is
///   (1/2n) * sum_i (y_i - b0 - x_i'b)^2
///     + lambda * sum_j p_j * (alpha*|b_j| + (1-alpha)/2 * b_j^2)
/// with p_j = 1 for penalized columns and 0 otherwise.
struct ElasticNetSpec {
  double alpha = 0.5;               // 1 = lasso, 0 = ridge
  std::vector<double> lambda_path;  // empty -> automatic log-spaced path
  int n_lambda = 100;
  double path_ratio = 1e-4;  // lambda_min / lambda_max for automatic paths
  double tol = 1e-7;         // convergence: max coefficient change per sweep
  int max_iter = 100000;     // sweep cap per lambda
  int folds = 10;
  std::uint64_t seed = 1;    // fold-assignment seed
};

/// Fitted path. Coefficients are on the original column scale; the
/// standardization record (column_mean / column_sd) is kept so
/// standardized-scale quantities can be reconstructed. Constant columns have
/// column_sd == 0 and coefficient exactly 0 at every lambda.
struct FitResult {
  std::vector<ColumnLabel> columns;
  std::vector<std::uint8_t> penalized;
  double alpha = 0.5;

  std::vector<double> lambda;    // decreasing
  Eigen::MatrixXd coefficients;  // p x n_lambda, original scale
  Eigen::VectorXd intercept;     // n_lambda
  Eigen::VectorXd column_mean;
  Eigen::VectorXd column_sd;
  std::vector<int> nonzero;      // penalized nonzero count per lambda

  // Cross-validation results; lambda_chosen is -1 until cross_validate runs.
  std::vector<double> cv_mean;
  std::vector<double> cv_se;
  int lambda_chosen = -1;
  std::vector<double> effects;  // exp(coefficient) at lambda_chosen

  Eigen::VectorXd coef_at(int lambda_index) const;
  double intercept_at(int lambda_index) const;

  /// Predictions for rows of X (original scale), one column per lambda.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const;
};

/// Fit the whole lambda path with warm starts. For automatic paths the first
/// point is lambda_max (computed so every penalized coefficient is exactly
/// zero there) and the reported model at it is the null-penalized fit.
/// Throws SolverError (with the lambda index) on non-convergence and
/// ValidationError on non-finite input.
FitResult fit_path(const DesignMatrix& design, const Eigen::VectorXd& y,
                   const ElasticNetSpec& spec);

/// K-fold cross-validation over the shared full-data path. Folds come from a
/// seeded shuffle (sizes differ by at most one); `threads` > 1 fits folds in
/// parallel with results identical to sequential execution. Picks the lambda
/// minimizing mean squared prediction error, breaking ties toward more
/// shrinkage.
FitResult cross_validate(const DesignMatrix& design, const Eigen::VectorXd& y,
                         const ElasticNetSpec& spec, int threads = 1);

/// Largest violation of the subgradient optimality conditions at one path
/// point, on the standardized scale. For penalized columns with b != 0 this
/// is |g_j - lambda*(1-alpha)*b_j - lambda*alpha*sign(b_j)|; for b == 0 it is
/// max(0, |g_j| - lambda*alpha); for unpenalized columns |g_j|, where
/// g_j = <x_j, r>/n.
double kkt_max_residual(const DesignMatrix& design, const Eigen::VectorXd& y,
                        const FitResult& fit, int lambda_index);

/// Fold id per row (values in [0, folds)), from a seeded shuffle.
std::vector<int> assign_folds(Eigen::Index n, int folds, std::uint64_t seed);

/// CV diagnostics table: lambda, cv_mean, cv_se, nonzero count.
void write_cv_csv(std::ostream& out, const FitResult& fit);

namespace detail {

/// Single-lambda cyclic coordinate descent on pre-standardized columns
/// (unit variance, mean 0) and centered response. `beta` and `resid` are
/// warm in/out. Columns with penalized == 0 take plain least-squares updates.
/// Converges when a full sweep moves no coefficient by more than tol AND the
/// subgradient residual is within tol; returns the sweep count. An observer,
/// when set, sees (sweep index, objective value) after every sweep.
int coordinate_descent(
    const Eigen::MatrixXd& Xs, const Eigen::VectorXd& yc,
    const std::vector<std::uint8_t>& penalized, double alpha, double lambda,
    double tol, int max_sweeps, Eigen::VectorXd& beta, Eigen::VectorXd& resid,
    const std::function<void(int, double)>& observer = {});

}  // namespace detail

}  // namespace rinkfx
