#include "urlr/lasso_path.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "urlr/error.hpp"

namespace urlr {

DenseLassoDesign::DenseLassoDesign(Eigen::MatrixXd xtilde, Eigen::VectorXd ytilde)
    : xtilde_(std::move(xtilde)), ytilde_(std::move(ytilde)) {
  if (xtilde_.rows() != ytilde_.size()) {
    throw ValidationError("Xtilde has " + std::to_string(xtilde_.rows()) +
                          " rows but ytilde has length " + std::to_string(ytilde_.size()));
  }
  gram_ = xtilde_.transpose() * xtilde_;
}

void PathSpec::validate() const {
  if (n_lambdas < 2) throw ValidationError("path needs at least 2 lambda values");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) {
    throw ValidationError("lambda_min_ratio must lie in (0, 1)");
  }
  if (!(cd_tolerance > 0.0)) throw ValidationError("cd_tolerance must be positive");
  if (max_sweeps == 0) throw ValidationError("max_sweeps must be positive");
}

namespace {

void check_weights(const LassoDesign& design, std::span<const double> weights) {
  if (static_cast<Eigen::Index>(weights.size()) != design.n_coords()) {
    throw ValidationError("weights have length " + std::to_string(weights.size()) +
                          " but the design has " + std::to_string(design.n_coords()) +
                          " coordinates");
  }
  for (double w : weights) {
    if (!(w >= 1.0) || !std::isfinite(w)) throw ValidationError("edge weights must be >= 1");
  }
}

// Rescales coordinate e by 1/w_e so that the weighted penalty becomes a plain
// l1 penalty: gamma'_e = w_e * gamma_e.
class ScaledDesign final : public LassoDesign {
 public:
  ScaledDesign(const LassoDesign& base, std::span<const double> weights)
      : base_(base), inv_w_(weights.size()) {
    for (std::size_t e = 0; e < weights.size(); ++e) inv_w_(Eigen::Index(e)) = 1.0 / weights[e];
    if (const LowRankGram* lr = base.low_rank_gram()) {
      low_rank_.diag = lr->diag.cwiseProduct(inv_w_.cwiseAbs2());
      low_rank_.v = inv_w_.asDiagonal() * lr->v;
      has_low_rank_ = true;
    }
  }

  Eigen::Index n_coords() const override { return base_.n_coords(); }
  Eigen::VectorXd correlation() const override {
    return base_.correlation().cwiseProduct(inv_w_);
  }
  void gram_column(Eigen::Index e, Eigen::Ref<Eigen::VectorXd> out) const override {
    base_.gram_column(e, out);
    out = out.cwiseProduct(inv_w_) * inv_w_(e);
  }
  double gram_diagonal(Eigen::Index e) const override {
    return base_.gram_diagonal(e) * inv_w_(e) * inv_w_(e);
  }
  const LowRankGram* low_rank_gram() const override {
    return has_low_rank_ ? &low_rank_ : nullptr;
  }

  const Eigen::VectorXd& inverse_weights() const { return inv_w_; }

 private:
  const LassoDesign& base_;
  Eigen::VectorXd inv_w_;
  LowRankGram low_rank_;
  bool has_low_rank_ = false;
};

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Cyclic coordinate descent for the unweighted LASSO. With a dense design the
// gradient g = X^T (y - X b) is maintained through cached Gram columns. When
// the Gram matrix is diag(d) - V V^T, only t = V^T b is maintained and
// g_e = corr_e - d_e b_e + V_e t is formed per coordinate; an exact Newton
// step on the active set (via Woodbury) then finishes each lambda.
class CoordinateDescent {
 public:
  CoordinateDescent(const LassoDesign& design, const PathSpec& spec)
      : design_(design),
        spec_(spec),
        n_(design.n_coords()),
        corr_(design.correlation()),
        diag_(n_),
        coef_(Eigen::VectorXd::Zero(n_)),
        grad_(corr_),
        in_active_(static_cast<std::size_t>(n_), 0),
        low_rank_(design.low_rank_gram()) {
    for (Eigen::Index e = 0; e < n_; ++e) diag_(e) = design.gram_diagonal(e);
    const double max_diag = n_ > 0 ? diag_.maxCoeff() : 0.0;
    dead_threshold_ = 1e-10 * std::max(max_diag, 1e-300);
    // Keep at most ~256 MiB of cached Gram columns.
    max_cached_ = n_ > 0 ? std::max<std::size_t>(1, (std::size_t{32} << 20) / std::size_t(n_))
                         : 0;
    if (low_rank_) {
      vt_ = low_rank_->v.transpose();
      t_ = Eigen::VectorXd::Zero(vt_.rows());
    }
  }

  void reset(const Eigen::VectorXd& start) {
    coef_ = start;
    active_.clear();
    std::fill(in_active_.begin(), in_active_.end(), 0);
    for (Eigen::Index e = 0; e < n_; ++e) {
      if (coef_(e) != 0.0) mark_active(e);
    }
    refresh_gradient();
  }

  // Recomputes g from scratch to shed accumulated rounding drift.
  void refresh_gradient() {
    if (low_rank_) {
      t_.noalias() = low_rank_->v.transpose() * coef_;
      grad_ = corr_ - low_rank_->diag.cwiseProduct(coef_);
      grad_.noalias() += low_rank_->v * t_;
      return;
    }
    grad_ = corr_;
    for (Eigen::Index e : active_) {
      if (coef_(e) == 0.0) continue;
      grad_.noalias() -= coef_(e) * column(e);
    }
  }

  void solve(double lambda, std::size_t lambda_index) {
    std::size_t sweeps = 0;
    auto count_sweep = [&](double change) {
      if (++sweeps > spec_.max_sweeps) throw ConvergenceError(lambda_index, change);
    };
    while (true) {
      double change = 0.0;
      for (Eigen::Index e = 0; e < n_; ++e) change = std::max(change, update(e, lambda));
      count_sweep(change);
      if (change < spec_.cd_tolerance) break;
      std::size_t inner = 0;
      bool finished = false;
      while (true) {
        change = 0.0;
        for (std::size_t i = 0; i < active_.size(); ++i) {
          change = std::max(change, update(active_[i], lambda));
        }
        count_sweep(change);
        if (change < spec_.cd_tolerance) break;
        if (low_rank_ && ++inner % kNewtonEvery == 0) {
          const bool done = newton(lambda);
          count_sweep(0.0);
          if (done) {
            finished = true;
            break;
          }
        }
      }
      if (finished) break;
    }
    if (low_rank_) refresh_gradient();
  }

  const Eigen::VectorXd& coef() const { return coef_; }
  const Eigen::VectorXd& grad() const { return grad_; }

 private:
  static constexpr std::size_t kNewtonEvery = 5;
  static constexpr double kDamping = 1e-9;
  static constexpr std::size_t kMaxCrossings = 10;
  static constexpr std::size_t kFaceRebuild = 2000;

  double gradient_at(Eigen::Index e) const {
    if (!low_rank_) return grad_(e);
    return corr_(e) - low_rank_->diag(e) * coef_(e) + vt_.col(e).dot(t_);
  }

  double update(Eigen::Index e, double lambda) {
    const double d = diag_(e);
    if (d <= dead_threshold_) return 0.0;
    const double old = coef_(e);
    const double next = soft_threshold(old * d + gradient_at(e), lambda) / d;
    const double delta = next - old;
    if (delta == 0.0) return 0.0;
    if (low_rank_) {
      t_.noalias() += delta * vt_.col(e);
    } else {
      grad_.noalias() -= delta * column(e);
    }
    coef_(e) = next;
    if (next != 0.0) mark_active(e);
    return std::abs(delta) * std::sqrt(d);
  }

  // Solves G_AA (x - b_A) = g_A - lambda s_A on the current support and sign
  // pattern. Returns true when x satisfies KKT to cd_tolerance. A sign change
  // stops the step at the first zero crossing instead.
  bool newton(double lambda) {
    for (std::size_t attempt = 0; attempt < kMaxCrossings; ++attempt) {
      const Step step = newton_step(lambda);
      if (step == Step::failed) return false;
      if (step == Step::crossed) continue;
      refresh_gradient();
      for (Eigen::Index e = 0; e < n_; ++e) {
        const double d = diag_(e);
        if (d <= dead_threshold_) continue;
        const double g = grad_(e);
        const double off = coef_(e) != 0.0 ? std::abs(g - std::copysign(lambda, coef_(e)))
                                           : std::max(0.0, std::abs(g) - lambda);
        if (off / std::sqrt(d) >= spec_.cd_tolerance) return false;
      }
      return true;
    }
    return false;
  }

  enum class Step { reached, crossed, failed };

  Step newton_step(double lambda) {
    const Eigen::VectorXd& dd = low_rank_->diag;
    std::vector<Eigen::Index> support;
    for (Eigen::Index e : active_) {
      if (coef_(e) != 0.0 && diag_(e) > dead_threshold_) support.push_back(e);
    }
    const auto m = static_cast<Eigen::Index>(support.size());
    if (m == 0) return Step::failed;
    const Eigen::Index r = vt_.rows();
    update_face(support);
    // A face can be singular (e.g. a node whose every comparison is active),
    // so solve with G_AA + eps D_A instead; the KKT check decides whether the
    // result is accepted.
    const double damp = 1.0 + kDamping;
    Eigen::VectorXd u(m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(r);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index e = support[std::size_t(i)];
      // Solve for the step from the current point so that, on a singular
      // face, the null-space component of coef is left alone.
      u(i) = (gradient_at(e) - std::copysign(lambda, coef_(e))) / (dd(e) * damp);
      rhs.noalias() += u(i) * vt_.col(e);
    }
    if (face_llt_.info() != Eigen::Success) return Step::failed;
    const Eigen::VectorXd z = face_llt_.solve(rhs);
    Eigen::VectorXd x(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index e = support[std::size_t(i)];
      x(i) = coef_(e) + u(i) + vt_.col(e).dot(z) / (dd(e) * damp);
    }
    if (!x.allFinite()) return Step::failed;

    double step = 1.0;
    Eigen::Index crossing = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double old = coef_(support[std::size_t(i)]);
      if (x(i) * old > 0.0) continue;
      const double tau = old / (old - x(i));
      if (tau < step) {
        step = tau;
        crossing = i;
      }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index e = support[std::size_t(i)];
      const double next = i == crossing ? 0.0 : coef_(e) + step * (x(i) - coef_(e));
      t_.noalias() += (next - coef_(e)) * vt_.col(e);
      coef_(e) = next;
    }
    return crossing >= 0 ? Step::crossed : Step::reached;
  }

  // Keeps the Cholesky factor of K = I - sum over the face of
  // v_e v_e^T / (d_e (1 + eps)), applying rank-one corrections while the
  // support drifts slowly. K is positive definite since sum v_e v_e^T / d_e
  // equals U_A^T U_A.
  void update_face(const std::vector<Eigen::Index>& support) {
    const Eigen::VectorXd& dd = low_rank_->diag;
    const Eigen::Index r = vt_.rows();
    const double damp = 1.0 + kDamping;
    std::vector<char> next(static_cast<std::size_t>(n_), 0);
    for (Eigen::Index e : support) next[std::size_t(e)] = 1;
    std::vector<Eigen::Index> added;
    std::vector<Eigen::Index> removed;
    if (face_.empty()) face_.assign(static_cast<std::size_t>(n_), 0);
    for (Eigen::Index e = 0; e < n_; ++e) {
      const auto i = static_cast<std::size_t>(e);
      if (next[i] && !face_[i]) added.push_back(e);
      if (!next[i] && face_[i]) removed.push_back(e);
    }
    face_ = std::move(next);
    const std::size_t changes = added.size() + removed.size();
    face_updates_ += changes;
    // A rebuild costs about (|A| + r / 3) r^2 flops, a rank-one update a few r^2.
    const bool incremental = face_ready_ &&
                             changes * 4 <= support.size() + static_cast<std::size_t>(r) &&
                             face_updates_ <= kFaceRebuild;
    if (incremental) {
      for (Eigen::Index e : removed) {
        face_llt_.rankUpdate(vt_.col(e) / std::sqrt(dd(e) * damp), 1.0);
      }
      for (Eigen::Index e : added) {
        face_llt_.rankUpdate(vt_.col(e) / std::sqrt(dd(e) * damp), -1.0);
      }
      if (face_llt_.info() == Eigen::Success) return;
    }
    face_updates_ = 0;
    Eigen::MatrixXd cols(r, static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) {
      cols.col(Eigen::Index(i)) = vt_.col(support[i]) / std::sqrt(dd(support[i]) * damp);
    }
    Eigen::MatrixXd k = Eigen::MatrixXd::Identity(r, r);
    k.noalias() -= cols * cols.transpose();
    face_llt_.compute(k);
    face_ready_ = face_llt_.info() == Eigen::Success;
  }

  void mark_active(Eigen::Index e) {
    auto& flag = in_active_[static_cast<std::size_t>(e)];
    if (!flag) {
      flag = 1;
      active_.push_back(e);
    }
  }

  const Eigen::VectorXd& column(Eigen::Index e) {
    if (auto it = cache_.find(e); it != cache_.end()) return it->second;
    if (cache_.size() < max_cached_) {
      Eigen::VectorXd col(n_);
      design_.gram_column(e, col);
      return cache_.emplace(e, std::move(col)).first->second;
    }
    scratch_.resize(n_);
    design_.gram_column(e, scratch_);
    return scratch_;
  }

  const LassoDesign& design_;
  PathSpec spec_;
  Eigen::Index n_;
  Eigen::VectorXd corr_;
  Eigen::VectorXd diag_;
  Eigen::VectorXd coef_;
  Eigen::VectorXd grad_;
  double dead_threshold_ = 0.0;
  std::vector<Eigen::Index> active_;
  std::vector<char> in_active_;
  std::unordered_map<Eigen::Index, Eigen::VectorXd> cache_;
  std::size_t max_cached_ = 0;
  Eigen::VectorXd scratch_;
  const LassoDesign::LowRankGram* low_rank_;
  // V^T, so that the row of V for one coordinate is contiguous.
  Eigen::MatrixXd vt_;
  Eigen::VectorXd t_;
  std::vector<char> face_;
  Eigen::LLT<Eigen::MatrixXd> face_llt_;
  bool face_ready_ = false;
  std::size_t face_updates_ = 0;
};

std::vector<double> log_grid(double top, const PathSpec& spec) {
  std::vector<double> grid(spec.n_lambdas);
  const double log_ratio = std::log(spec.lambda_min_ratio);
  for (std::size_t k = 0; k < spec.n_lambdas; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(spec.n_lambdas - 1);
    grid[k] = k == 0 ? top : top * std::exp(t * log_ratio);
  }
  return grid;
}

}  // namespace

double lambda_max(const LassoDesign& design, std::span<const double> weights) {
  check_weights(design, weights);
  const Eigen::VectorXd c = design.correlation();
  double top = 0.0;
  for (Eigen::Index e = 0; e < c.size(); ++e) {
    top = std::max(top, std::abs(c(e)) / weights[std::size_t(e)]);
  }
  return top;
}

OutlierPath lasso_path(const LassoDesign& design, std::span<const double> weights,
                       const PathSpec& spec) {
  spec.validate();
  check_weights(design, weights);
  const Eigen::Index n = design.n_coords();
  const ScaledDesign scaled(design, weights);
  const Eigen::VectorXd& inv_w = scaled.inverse_weights();

  OutlierPath path;
  path.activation_lambda = Eigen::VectorXd::Zero(n);
  path.order.resize(static_cast<std::size_t>(n));
  std::iota(path.order.begin(), path.order.end(), Eigen::Index{0});

  const double top = lambda_max(design, weights);
  if (!(top > 0.0) || !std::isfinite(top)) {
    if (!std::isfinite(top)) throw NumericalError("non-finite correlation in LASSO design");
    // Zero response: gamma stays identically zero along the whole path.
    path.lambdas = log_grid(0.0, spec);
    if (spec.keep_snapshots) {
      path.gamma_at.assign(spec.n_lambdas, Eigen::VectorXd::Zero(n));
    }
    return path;
  }
  path.lambdas = log_grid(top, spec);

  CoordinateDescent cd(scaled, spec);
  // Tie keys: |normalized correlation| at the grid point preceding entry, then
  // |gamma| at the entry grid point.
  Eigen::VectorXd entry_corr = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd entry_gamma = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd prev_abs_grad = cd.grad().cwiseAbs();

  for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
    const double lambda = path.lambdas[k];
    if (k > 0) cd.refresh_gradient();
    cd.solve(lambda, k);
    const Eigen::VectorXd& coef = cd.coef();
    for (Eigen::Index e = 0; e < n; ++e) {
      if (coef(e) != 0.0 && path.activation_lambda(e) == 0.0) {
        path.activation_lambda(e) = k == 0 ? lambda : path.lambdas[k - 1];
        entry_corr(e) = prev_abs_grad(e);
        entry_gamma(e) = std::abs(coef(e) * inv_w(e));
      }
    }
    prev_abs_grad = cd.grad().cwiseAbs();
    if (spec.keep_snapshots) path.gamma_at.push_back(coef.cwiseProduct(inv_w));
  }
  for (Eigen::Index e = 0; e < n; ++e) {
    if (path.activation_lambda(e) == 0.0) entry_corr(e) = prev_abs_grad(e);
  }

  std::sort(path.order.begin(), path.order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (path.activation_lambda(a) != path.activation_lambda(b)) {
      return path.activation_lambda(a) > path.activation_lambda(b);
    }
    if (entry_corr(a) != entry_corr(b)) return entry_corr(a) > entry_corr(b);
    if (entry_gamma(a) != entry_gamma(b)) return entry_gamma(a) > entry_gamma(b);
    return a < b;
  });
  return path;
}

OutlierPath lasso_path(const Eigen::MatrixXd& xtilde, const Eigen::VectorXd& ytilde,
                       std::span<const double> weights, const PathSpec& spec) {
  return lasso_path(DenseLassoDesign(xtilde, ytilde), weights, spec);
}

Eigen::VectorXd lasso_solve(const LassoDesign& design, std::span<const double> weights,
                            double lambda, const PathSpec& spec,
                            const std::optional<Eigen::VectorXd>& warm) {
  spec.validate();
  check_weights(design, weights);
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be non-negative");
  const ScaledDesign scaled(design, weights);
  const Eigen::VectorXd& inv_w = scaled.inverse_weights();
  CoordinateDescent cd(scaled, spec);
  if (warm) {
    if (warm->size() != design.n_coords()) {
      throw ValidationError("warm start has the wrong length");
    }
    cd.reset(warm->cwiseQuotient(inv_w));
  }
  cd.solve(lambda, 0);
  return cd.coef().cwiseProduct(inv_w);
}

double kkt_violation(const LassoDesign& design, std::span<const double> weights,
                     const Eigen::VectorXd& gamma, double lambda) {
  check_weights(design, weights);
  const Eigen::Index n = design.n_coords();
  Eigen::VectorXd grad = design.correlation();
  Eigen::VectorXd col(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (gamma(k) == 0.0) continue;
    design.gram_column(k, col);
    grad.noalias() -= gamma(k) * col;
  }
  double worst = 0.0;
  for (Eigen::Index e = 0; e < n; ++e) {
    const double bound = lambda * weights[std::size_t(e)];
    const double v = gamma(e) != 0.0 ? std::abs(grad(e) - std::copysign(bound, gamma(e)))
                                     : std::max(0.0, std::abs(grad(e)) - bound);
    worst = std::max(worst, v);
  }
  return worst;
}

EdgeMask prune(const OutlierPath& path, double p_percent) {
  if (!(p_percent >= 0.0 && p_percent <= 100.0)) {
    throw ValidationError("pruning rate " + std::to_string(p_percent) +
                          " is outside [0, 100]");
  }
  const std::size_t n = path.order.size();
  // Guard against 0.29 * 100 style representation error before flooring.
  auto cut = static_cast<std::size_t>(
      std::floor(p_percent * static_cast<double>(n) / 100.0 + 1e-9));
  cut = std::min(cut, n);
  EdgeMask f(n, 1);
  for (std::size_t i = 0; i < cut; ++i) f[static_cast<std::size_t>(path.order[i])] = 0;
  return f;
}

}  // namespace urlr
