#include "rinkfx/elastic_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <thread>

#include "rinkfx/csv.hpp"
#include "rinkfx/errors.hpp"
#include "rinkfx/rng.hpp"

namespace rinkfx {

double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

namespace detail {

namespace {

double objective_value(const Eigen::VectorXd& resid,
                       const std::vector<std::uint8_t>& penalized,
                       const Eigen::VectorXd& beta, double alpha,
                       double lambda) {
  const double n = static_cast<double>(resid.size());
  double value = 0.5 * resid.squaredNorm() / n;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (!penalized[static_cast<std::size_t>(j)]) continue;
    value += lambda * (alpha * std::abs(beta[j]) +
                       0.5 * (1.0 - alpha) * beta[j] * beta[j]);
  }
  return value;
}

}  // namespace

int coordinate_descent(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& yc,
                       const std::vector<std::uint8_t>& penalized,
                       double alpha, double lambda, double tol, int max_sweeps,
                       Eigen::VectorXd& beta, Eigen::VectorXd& resid,
                       const std::function<void(int, double)>& observer) {
  const Eigen::Index n = Xs.rows();
  const Eigen::Index p = Xs.cols();
  const double la = lambda * alpha;
  const double ridge_denom = 1.0 + lambda * (1.0 - alpha);
  const double inv_n = 1.0 / static_cast<double>(n);
  int sweeps = 0;

  auto sweep = [&](bool support_only) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const bool pen = penalized[static_cast<std::size_t>(j)] != 0;
      if (support_only && pen && beta[j] == 0.0) continue;
      // Unit-variance columns make the coordinate minimizer closed-form.
      const double z = Xs.col(j).dot(resid) * inv_n + beta[j];
      const double next = pen ? soft_threshold(z, la) / ridge_denom : z;
      const double change = next - beta[j];
      if (change != 0.0) {
        resid.noalias() -= change * Xs.col(j);
        beta[j] = next;
        const double magnitude = std::abs(change);
        if (magnitude > max_change) max_change = magnitude;
      }
    }
    ++sweeps;
    if (observer) {
      observer(sweeps, objective_value(resid, penalized, beta, alpha, lambda));
    }
    return max_change;
  };

  while (true) {
    if (sweeps >= max_sweeps) {
      throw SolverError(-1, "coordinate descent did not converge in " +
                                std::to_string(max_sweeps) + " sweeps");
    }
    if (sweep(false) < tol) {
      // Verify subgradient optimality on a drift-free residual before
      // declaring convergence.
      resid = yc;
      resid.noalias() -= Xs * beta;
      Eigen::VectorXd grad = Xs.transpose() * resid * inv_n;
      double worst = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        double r;
        if (!penalized[static_cast<std::size_t>(j)]) {
          r = std::abs(grad[j]);
        } else if (beta[j] != 0.0) {
          r = std::abs(grad[j] - lambda * (1.0 - alpha) * beta[j] -
                       la * (beta[j] > 0 ? 1.0 : -1.0));
        } else {
          r = std::max(0.0, std::abs(grad[j]) - la);
        }
        if (r > worst) worst = r;
      }
      if (worst <= tol) break;
      continue;
    }
    while (sweeps < max_sweeps && sweep(true) >= tol) {
    }
  }
  return sweeps;
}

}  // namespace detail

namespace {

/// Same fixed point as detail::coordinate_descent, but coordinate gradients
/// come from the Gram matrix: with s = G*beta, <x_j, r> = q_j - s_j, so a
/// sweep costs O(p * changed) instead of O(n * p). Pays off whenever n >> p,
/// which holds for every design this pipeline builds.
class CovarianceCd {
 public:
  CovarianceCd(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& yc)
      : n_(static_cast<double>(Xs.rows())), G_(Xs.cols(), Xs.cols()) {
    G_.setZero();
    G_.selfadjointView<Eigen::Lower>().rankUpdate(Xs.transpose());
    G_ = G_.selfadjointView<Eigen::Lower>();
    q_.noalias() = Xs.transpose() * yc;
  }

  double grad_abs(Eigen::Index j, const Eigen::VectorXd& s) const {
    return std::abs(q_[j] - s[j]) / n_;
  }

  void refresh(const Eigen::VectorXd& beta, Eigen::VectorXd& s) const {
    s.noalias() = G_ * beta;
  }

  /// freeze_penalized pins every penalized coordinate at its current value;
  /// the null fit uses it to move only the unpenalized columns.
  int solve(const std::vector<std::uint8_t>& penalized, double alpha,
            double lambda, double tol, int max_sweeps, bool freeze_penalized,
            Eigen::VectorXd& beta, Eigen::VectorXd& s) const {
    const Eigen::Index p = G_.cols();
    const double la = lambda * alpha;
    const double ridge_denom = 1.0 + lambda * (1.0 - alpha);
    int sweeps = 0;

    auto sweep = [&](bool support_only) {
      double max_change = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const bool pen = penalized[static_cast<std::size_t>(j)] != 0;
        if (pen && freeze_penalized) continue;
        if (support_only && pen && beta[j] == 0.0) continue;
        const double z = (q_[j] - s[j]) / n_ + beta[j];
        const double next = pen ? soft_threshold(z, la) / ridge_denom : z;
        const double change = next - beta[j];
        if (change != 0.0) {
          s.noalias() += change * G_.col(j);
          beta[j] = next;
          const double magnitude = std::abs(change);
          if (magnitude > max_change) max_change = magnitude;
        }
      }
      ++sweeps;
      return max_change;
    };

    while (true) {
      if (sweeps >= max_sweeps) {
        throw SolverError(-1, "coordinate descent did not converge in " +
                                  std::to_string(max_sweeps) + " sweeps");
      }
      if (sweep(false) < tol) {
        refresh(beta, s);  // drift control before the optimality check
        double worst = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
          const bool pen = penalized[static_cast<std::size_t>(j)] != 0;
          if (pen && freeze_penalized) continue;
          const double g = (q_[j] - s[j]) / n_;
          double r;
          if (!pen) {
            r = std::abs(g);
          } else if (beta[j] != 0.0) {
            r = std::abs(g - lambda * (1.0 - alpha) * beta[j] -
                         la * (beta[j] > 0 ? 1.0 : -1.0));
          } else {
            r = std::max(0.0, std::abs(g) - la);
          }
          if (r > worst) worst = r;
        }
        if (worst <= tol) break;
        continue;
      }
      while (sweeps < max_sweeps && sweep(true) >= tol) {
      }
    }
    return sweeps;
  }

 private:
  double n_;
  Eigen::MatrixXd G_;
  Eigen::VectorXd q_;
};

struct Standardized {
  Eigen::VectorXd mean;        // width p
  Eigen::VectorXd sd;          // width p, 0 marks a constant column
  std::vector<int> active;     // original indices of non-constant columns
  Eigen::MatrixXd Xs;          // n x active.size()
  std::vector<std::uint8_t> pen_active;
  Eigen::VectorXd yc;
  double y_mean = 0.0;
};

Standardized standardize(const DesignMatrix& design,
                         const Eigen::VectorXd& y) {
  const Eigen::MatrixXd& X = design.values;
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  Standardized s;
  s.mean.resize(p);
  s.sd.setZero(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    s.mean[j] = X.col(j).mean();
    const double var =
        (X.col(j).array() - s.mean[j]).matrix().squaredNorm() /
        static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd > 1e-10 * std::max(1.0, std::abs(s.mean[j]))) {
      s.sd[j] = sd;
      s.active.push_back(static_cast<int>(j));
    }
  }
  s.Xs.resize(n, static_cast<Eigen::Index>(s.active.size()));
  s.pen_active.resize(s.active.size());
  for (std::size_t a = 0; a < s.active.size(); ++a) {
    const Eigen::Index j = s.active[a];
    s.Xs.col(static_cast<Eigen::Index>(a)) =
        (X.col(j).array() - s.mean[j]).matrix() / s.sd[j];
    s.pen_active[a] = design.penalized[static_cast<std::size_t>(j)];
  }
  s.y_mean = y.mean();
  s.yc = y.array() - s.y_mean;
  return s;
}

void validate_inputs(const DesignMatrix& design, const Eigen::VectorXd& y,
                     const ElasticNetSpec& spec) {
  if (design.values.rows() < 2) {
    throw ValidationError("fit_path: need at least 2 rows");
  }
  if (design.values.rows() != y.size()) {
    throw ValidationError("fit_path: X and y row counts differ");
  }
  if (design.penalized.size() !=
      static_cast<std::size_t>(design.values.cols())) {
    throw ValidationError("fit_path: penalized mask width mismatch");
  }
  if (!design.values.allFinite() || !y.allFinite()) {
    throw ValidationError("fit_path: non-finite input");
  }
  if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) {
    throw ValidationError("fit_path: alpha must be in [0, 1]");
  }
  if (!(spec.tol > 0.0) || spec.max_iter < 1) {
    throw ValidationError("fit_path: invalid tol or max_iter");
  }
  if (spec.lambda_path.empty()) {
    if (spec.n_lambda < 1 ||
        !(spec.path_ratio > 0.0 && spec.path_ratio < 1.0)) {
      throw ValidationError("fit_path: invalid automatic path parameters");
    }
  } else {
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : spec.lambda_path) {
      if (!(lambda > 0.0) || lambda >= prev) {
        throw ValidationError(
            "fit_path: lambda_path must be strictly decreasing and positive");
      }
      prev = lambda;
    }
  }
}

}  // namespace

FitResult fit_path(const DesignMatrix& design, const Eigen::VectorXd& y,
                   const ElasticNetSpec& spec) {
  validate_inputs(design, y, spec);
  Standardized s = standardize(design, y);
  const Eigen::Index p = design.values.cols();
  const Eigen::Index pa = static_cast<Eigen::Index>(s.active.size());

  // Gram-matrix mode amortizes everything over one n*p^2 product; fall back
  // to residual updates only for very wide problems.
  const bool covariance = pa <= 4096;
  std::optional<CovarianceCd> cd;
  if (covariance) cd.emplace(s.Xs, s.yc);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(pa);
  Eigen::VectorXd state = covariance ? Eigen::VectorXd::Zero(pa) : s.yc;

  // Null-penalized fit: only the unpenalized columns move. Its residual
  // defines lambda_max, so the automatic path genuinely starts at the
  // smallest lambda with every penalized coefficient at zero. With the
  // intercept as the only unpenalized term this is y - mean(y).
  const bool any_unpenalized =
      std::any_of(s.pen_active.begin(), s.pen_active.end(),
                  [](std::uint8_t pen) { return pen == 0; });
  if (any_unpenalized) {
    try {
      if (covariance) {
        cd->solve(s.pen_active, spec.alpha, 0.0, spec.tol, spec.max_iter,
                  /*freeze_penalized=*/true, beta, state);
      } else {
        std::vector<int> unpen;
        for (std::size_t a = 0; a < s.pen_active.size(); ++a) {
          if (!s.pen_active[a]) unpen.push_back(static_cast<int>(a));
        }
        Eigen::MatrixXd Xu(s.Xs.rows(),
                           static_cast<Eigen::Index>(unpen.size()));
        for (std::size_t u = 0; u < unpen.size(); ++u) {
          Xu.col(static_cast<Eigen::Index>(u)) = s.Xs.col(unpen[u]);
        }
        Eigen::VectorXd beta_u = Eigen::VectorXd::Zero(Xu.cols());
        Eigen::VectorXd resid_u = s.yc;
        std::vector<std::uint8_t> mask(unpen.size(), 0);
        detail::coordinate_descent(Xu, s.yc, mask, spec.alpha, 0.0, spec.tol,
                                   spec.max_iter, beta_u, resid_u);
        for (std::size_t u = 0; u < unpen.size(); ++u) {
          beta[unpen[u]] = beta_u[static_cast<Eigen::Index>(u)];
        }
        state = resid_u;
      }
    } catch (const SolverError& err) {
      throw SolverError(0, std::string("null fit: ") + err.what());
    }
  }

  const bool auto_path = spec.lambda_path.empty();
  std::vector<double> path;
  if (auto_path) {
    double lambda_max = 0.0;
    for (Eigen::Index a = 0; a < pa; ++a) {
      if (!s.pen_active[static_cast<std::size_t>(a)]) continue;
      const double g = covariance
                           ? cd->grad_abs(a, state)
                           : std::abs(s.Xs.col(a).dot(state)) /
                                 static_cast<double>(s.Xs.rows());
      lambda_max = std::max(lambda_max, g);
    }
    lambda_max /= std::max(spec.alpha, 1e-3);
    if (!(lambda_max > 0.0)) lambda_max = 1.0;
    path.resize(static_cast<std::size_t>(spec.n_lambda));
    if (spec.n_lambda == 1) {
      path[0] = lambda_max;
    } else {
      for (int i = 0; i < spec.n_lambda; ++i) {
        path[static_cast<std::size_t>(i)] =
            lambda_max * std::pow(spec.path_ratio,
                                  static_cast<double>(i) /
                                      static_cast<double>(spec.n_lambda - 1));
      }
    }
  } else {
    path = spec.lambda_path;
  }
  const int L = static_cast<int>(path.size());

  FitResult fit;
  fit.columns = design.columns;
  fit.penalized = design.penalized;
  fit.alpha = spec.alpha;
  fit.lambda = path;
  fit.coefficients = Eigen::MatrixXd::Zero(p, L);
  fit.intercept.resize(L);
  fit.column_mean = s.mean;
  fit.column_sd = s.sd;
  fit.nonzero.assign(static_cast<std::size_t>(L), 0);

  auto record = [&](int l) {
    double b0 = s.y_mean;
    int nz = 0;
    for (Eigen::Index a = 0; a < pa; ++a) {
      const int j = s.active[static_cast<std::size_t>(a)];
      const double coef = beta[a] / s.sd[j];
      fit.coefficients(j, l) = coef;
      b0 -= coef * s.mean[j];
      if (s.pen_active[static_cast<std::size_t>(a)] && beta[a] != 0.0) ++nz;
    }
    fit.intercept[l] = b0;
    fit.nonzero[static_cast<std::size_t>(l)] = nz;
  };

  // For automatic paths the first point is the null-penalized model by
  // construction; solving starts at the second point.
  int start = 0;
  if (auto_path) {
    record(0);
    start = 1;
  }
  for (int l = start; l < L; ++l) {
    try {
      const double lambda = path[static_cast<std::size_t>(l)];
      if (covariance) {
        cd->solve(s.pen_active, spec.alpha, lambda, spec.tol, spec.max_iter,
                  /*freeze_penalized=*/false, beta, state);
      } else {
        detail::coordinate_descent(s.Xs, s.yc, s.pen_active, spec.alpha,
                                   lambda, spec.tol, spec.max_iter, beta,
                                   state);
      }
    } catch (const SolverError& err) {
      throw SolverError(l, err.what());
    }
    record(l);
  }
  return fit;
}

Eigen::VectorXd FitResult::coef_at(int lambda_index) const {
  return coefficients.col(lambda_index);
}

double FitResult::intercept_at(int lambda_index) const {
  return intercept[lambda_index];
}

Eigen::MatrixXd FitResult::predict(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd preds = X * coefficients;
  preds.rowwise() += intercept.transpose();
  return preds;
}

std::vector<int> assign_folds(Eigen::Index n, int folds, std::uint64_t seed) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) {
    fold_of[static_cast<std::size_t>(order[i])] =
        static_cast<int>(i % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

FitResult cross_validate(const DesignMatrix& design, const Eigen::VectorXd& y,
                         const ElasticNetSpec& spec, int threads) {
  if (spec.folds < 2) {
    throw ValidationError("cross_validate: folds must be >= 2");
  }
  if (design.values.rows() < spec.folds) {
    throw ValidationError("cross_validate: fewer rows than folds");
  }
  FitResult full = fit_path(design, y, spec);
  const Eigen::Index n = design.values.rows();
  const int K = spec.folds;
  const int L = static_cast<int>(full.lambda.size());
  const std::vector<int> fold_of =
      assign_folds(n, K, derive_seed(spec.seed, "cv-folds"));

  Eigen::MatrixXd fold_sqerr = Eigen::MatrixXd::Zero(K, L);
  std::vector<Eigen::Index> fold_sizes(static_cast<std::size_t>(K), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    ++fold_sizes[static_cast<std::size_t>(fold_of[static_cast<std::size_t>(i)])];
  }

  auto run_fold = [&](int k) {
    const Eigen::Index n_test = fold_sizes[static_cast<std::size_t>(k)];
    const Eigen::Index n_train = n - n_test;
    DesignMatrix train;
    train.columns = design.columns;
    train.penalized = design.penalized;
    train.values.resize(n_train, design.values.cols());
    Eigen::VectorXd y_train(n_train);
    Eigen::MatrixXd X_test(n_test, design.values.cols());
    Eigen::VectorXd y_test(n_test);
    Eigen::Index r = 0, t = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (fold_of[static_cast<std::size_t>(i)] == k) {
        X_test.row(t) = design.values.row(i);
        y_test[t] = y[i];
        ++t;
      } else {
        train.values.row(r) = design.values.row(i);
        y_train[r] = y[i];
        ++r;
      }
    }
    ElasticNetSpec sub = spec;
    sub.lambda_path = full.lambda;
    FitResult f = fit_path(train, y_train, sub);
    const Eigen::MatrixXd preds = f.predict(X_test);
    for (int l = 0; l < L; ++l) {
      fold_sqerr(k, l) = (preds.col(l) - y_test).squaredNorm();
    }
  };

  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  threads = std::clamp(threads, 1, K);
  if (threads == 1) {
    for (int k = 0; k < K; ++k) run_fold(k);
  } else {
    // Folds write disjoint rows of fold_sqerr; assembly order is fixed, so
    // the result matches sequential execution bit for bit.
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (int k = t; k < K; k += threads) run_fold(k);
      });
    }
    for (auto& th : pool) th.join();
  }

  full.cv_mean.assign(static_cast<std::size_t>(L), 0.0);
  full.cv_se.assign(static_cast<std::size_t>(L), 0.0);
  for (int l = 0; l < L; ++l) {
    full.cv_mean[static_cast<std::size_t>(l)] =
        fold_sqerr.col(l).sum() / static_cast<double>(n);
    // Standard error over per-fold mean errors.
    double fold_mean_sum = 0.0;
    for (int k = 0; k < K; ++k) {
      fold_mean_sum += fold_sqerr(k, l) /
                       static_cast<double>(fold_sizes[static_cast<std::size_t>(k)]);
    }
    const double center = fold_mean_sum / K;
    double ss = 0.0;
    for (int k = 0; k < K; ++k) {
      const double m = fold_sqerr(k, l) /
                       static_cast<double>(fold_sizes[static_cast<std::size_t>(k)]);
      ss += (m - center) * (m - center);
    }
    full.cv_se[static_cast<std::size_t>(l)] =
        std::sqrt(ss / (K - 1)) / std::sqrt(static_cast<double>(K));
  }

  // Ties break toward the larger lambda (more shrinkage): the path is
  // decreasing, so the first minimizer wins.
  int best = 0;
  for (int l = 1; l < L; ++l) {
    if (full.cv_mean[static_cast<std::size_t>(l)] <
        full.cv_mean[static_cast<std::size_t>(best)]) {
      best = l;
    }
  }
  full.lambda_chosen = best;
  full.effects.resize(static_cast<std::size_t>(full.coefficients.rows()));
  for (Eigen::Index j = 0; j < full.coefficients.rows(); ++j) {
    full.effects[static_cast<std::size_t>(j)] =
        std::exp(full.coefficients(j, best));
  }
  return full;
}

double kkt_max_residual(const DesignMatrix& design, const Eigen::VectorXd& y,
                        const FitResult& fit, int lambda_index) {
  const Eigen::MatrixXd& X = design.values;
  const Eigen::Index n = X.rows();
  const double lambda = fit.lambda[static_cast<std::size_t>(lambda_index)];
  const double alpha = fit.alpha;
  const Eigen::VectorXd coef = fit.coefficients.col(lambda_index);
  Eigen::VectorXd r = y;
  r.array() -= fit.intercept[lambda_index];
  r.noalias() -= X * coef;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double sd = fit.column_sd[j];
    if (sd == 0.0) continue;  // constant column, coefficient pinned at 0
    const double g =
        (X.col(j).array() - fit.column_mean[j]).matrix().dot(r) /
        (static_cast<double>(n) * sd);
    const double b = coef[j] * sd;  // standardized-scale coefficient
    double res;
    if (!fit.penalized[static_cast<std::size_t>(j)]) {
      res = std::abs(g);
    } else if (b != 0.0) {
      res = std::abs(g - lambda * (1.0 - alpha) * b -
                     lambda * alpha * (b > 0 ? 1.0 : -1.0));
    } else {
      res = std::max(0.0, std::abs(g) - lambda * alpha);
    }
    if (res > worst) worst = res;
  }
  return worst;
}

void write_cv_csv(std::ostream& out, const FitResult& fit) {
  CsvTable table;
  table.header = {"lambda", "cv_mean", "cv_se", "nonzero"};
  for (std::size_t l = 0; l < fit.lambda.size(); ++l) {
    table.rows.push_back({fmt_double(fit.lambda[l]),
                          l < fit.cv_mean.size() ? fmt_double(fit.cv_mean[l])
                                                 : std::string(""),
                          l < fit.cv_se.size() ? fmt_double(fit.cv_se[l])
                                               : std::string(""),
                          std::to_string(fit.nonzero[l])});
  }
  write_csv(out, table);
}

}  // namespace rinkfx
