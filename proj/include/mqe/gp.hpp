#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "mqe/errors.hpp"
#include "mqe/geometry.hpp"

namespace mqe {

struct KernelParams {
  double lengthscale = 12.0;       // meters
  double signal_variance = 1.0;    // intensity^2
  double noise_variance = 0.0025;  // intensity^2

  void validate() const {
    if (!(lengthscale > 0.0) || !(signal_variance > 0.0) || !(noise_variance > 0.0))
      throw ValidationError("KernelParams: all parameters must be strictly positive");
  }
};

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using LatticePtr = std::shared_ptr<const PointMatrix>;

inline PointMatrix to_points(std::span<const Vec2> pts) {
  PointMatrix m(static_cast<Eigen::Index>(pts.size()), 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m(i, 0) = pts[static_cast<std::size_t>(i)].x;
    m(i, 1) = pts[static_cast<std::size_t>(i)].y;
  }
  return m;
}

// Squared-exponential kernel matrix k(A, B), one row per point of A.
inline void se_kernel(const KernelParams& kp, const Eigen::Ref<const PointMatrix>& A,
                      const Eigen::Ref<const PointMatrix>& B, Eigen::MatrixXd& out) {
  const Eigen::Index n = A.rows(), m = B.rows();
  out.resize(n, m);
  if (n == 0 || m == 0) return;
  out.noalias() = A * B.transpose();
  out *= -2.0;
  out.colwise() += A.rowwise().squaredNorm();
  out.rowwise() += B.rowwise().squaredNorm().transpose();
  const double inv = -0.5 / (kp.lengthscale * kp.lengthscale);
  out = (kp.signal_variance * (out.cwiseMax(0.0) * inv).array().exp()).matrix();
}

inline Eigen::MatrixXd se_kernel(const KernelParams& kp, const Eigen::Ref<const PointMatrix>& A,
                                 const Eigen::Ref<const PointMatrix>& B) {
  Eigen::MatrixXd out;
  se_kernel(kp, A, B, out);
  return out;
}

inline LatticePtr make_cell_lattice(const GridSpec& grid) {
  auto m = std::make_shared<PointMatrix>(grid.n_cells(), 2);
  for (int i = 0; i < grid.n_cells(); ++i) {
    const Vec2 p = grid.cell_center(grid.cell_at(i));
    (*m)(i, 0) = p.x;
    (*m)(i, 1) = p.y;
  }
  return m;
}

inline LatticePtr make_pixel_lattice(const GridSpec& grid) {
  auto m = std::make_shared<PointMatrix>(grid.n_lattice(), 2);
  Eigen::Index r = 0;
  for (int iy = 0; iy < grid.lattice_ny(); ++iy)
    for (int ix = 0; ix < grid.lattice_nx(); ++ix, ++r) {
      const Vec2 p = grid.lattice_point(ix, iy);
      (*m)(r, 0) = p.x;
      (*m)(r, 1) = p.y;
    }
  return m;
}

// Exact Gaussian-process posterior over the field, squared-exponential
// kernel, conditioned on noisy point observations.
//
// The Cholesky factor of the regularized kernel matrix lives in a
// capacity buffer and is extended in place when data arrives, so
// conditioning on a new image footprint costs O(k n^2) instead of a full
// refactorization. push()/pop() expose scoped hypothetical updates for
// planning: pop truncates back to a checkpoint in O(n^2).
//
// A query lattice may be registered; its cross-kernel columns are then
// maintained incrementally and posterior means over the lattice become a
// single mat-vec.
//
// Value semantics: copying yields an independent model. Concurrent
// predict() calls on an unchanging model are safe.
class BeliefModel {
 public:
  static constexpr double kJitter = 1e-8;

  explicit BeliefModel(KernelParams kp = {}, double prior_mean = 0.5)
      : params_(kp), prior_mean_(prior_mean) {
    params_.validate();
  }

  BeliefModel(const BeliefModel& o)
      : params_(o.params_), prior_mean_(o.prior_mean_), n_(o.n_), lattice_(o.lattice_) {
    reserve_exact(o.n_ + kCloneHeadroom);
    lbuf_.topLeftCorner(n_, n_) = o.lbuf_.topLeftCorner(n_, n_);
    xbuf_.topRows(n_) = o.xbuf_.topRows(n_);
    ybuf_.head(n_) = o.ybuf_.head(n_);
    alpha_ = o.alpha_;
    if (lattice_) latk_.leftCols(n_) = o.latk_.leftCols(n_);
  }
  BeliefModel& operator=(const BeliefModel& o) {
    BeliefModel tmp(o);
    *this = std::move(tmp);
    return *this;
  }
  BeliefModel(BeliefModel&&) = default;
  BeliefModel& operator=(BeliefModel&&) = default;

  int size() const { return static_cast<int>(n_); }
  const KernelParams& kernel() const { return params_; }
  double prior_mean() const { return prior_mean_; }

  // Pre-grows the internal buffers; pointers into training data stay valid
  // as long as the training count stays at or below the reserved size.
  void reserve(int capacity) { ensure_capacity(capacity); }

  Eigen::Ref<const PointMatrix> train_x() const { return xbuf_.topRows(n_); }
  Eigen::VectorXd train_y() const { return ybuf_.head(n_).array() + prior_mean_; }

  // Conditions on additional observations. Empty input is a no-op.
  void update(std::span<const Vec2> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
      throw ValidationError("BeliefModel::update: location/value count mismatch");
    if (xs.empty()) return;
    const PointMatrix X = to_points(xs);
    Eigen::VectorXd y(static_cast<Eigen::Index>(ys.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = ys[static_cast<std::size_t>(i)];
    append(X, &y, nullptr, 0, nullptr, nullptr, nullptr);
  }
  void update(const PointMatrix& X, const Eigen::VectorXd& y,
              const Eigen::MatrixXd* lat_cols = nullptr) {
    if (X.rows() != y.size())
      throw ValidationError("BeliefModel::update: location/value count mismatch");
    if (X.rows() == 0) return;
    append(X, &y, nullptr, 0, lat_cols, nullptr, nullptr);
  }

  // Scoped hypothetical update; returns a checkpoint for pop().
  // k_top, when given, supplies the first k_top_rows rows of k(train, X).
  int push(const Eigen::Ref<const PointMatrix>& X, const Eigen::VectorXd& y,
           const Eigen::MatrixXd* lat_cols = nullptr, const Eigen::MatrixXd* k_top = nullptr,
           Eigen::Index k_top_rows = 0) {
    const int ck = static_cast<int>(n_);
    if (X.rows() > 0) append(X, &y, k_top, k_top_rows, lat_cols, nullptr, nullptr);
    return ck;
  }

  // Conditions on the model's own predicted means at X (expected new
  // measurements) and reports the pre-update predictive moments.
  // k_top, when given, supplies the first k_top_rows rows of k(train, X).
  struct Hallucination {
    int checkpoint = 0;
    Eigen::VectorXd means;  // pre-update posterior mean at X
    Eigen::VectorXd vars;   // pre-update posterior variance at X
  };
  Hallucination hallucinate_push(const Eigen::Ref<const PointMatrix>& X,
                                 const Eigen::MatrixXd* k_top = nullptr,
                                 Eigen::Index k_top_rows = 0,
                                 const Eigen::MatrixXd* lat_cols = nullptr) {
    Hallucination h;
    h.checkpoint = static_cast<int>(n_);
    if (X.rows() > 0) append(X, nullptr, k_top, k_top_rows, lat_cols, &h.means, &h.vars);
    return h;
  }

  // Truncates back to a checkpoint from push()/hallucinate_push().
  // Checkpoints must be popped in LIFO order.
  void pop(int checkpoint) {
    if (checkpoint < 0 || checkpoint > n_)
      throw ValidationError("BeliefModel::pop: bad checkpoint");
    n_ = checkpoint;
    refresh_alpha();
  }

  // Standard exact posterior. Empty model: prior mean and prior variance.
  void predict(const Eigen::Ref<const PointMatrix>& q, Eigen::VectorXd& mean,
               Eigen::VectorXd& var) const {
    const Eigen::Index m = q.rows();
    mean.setConstant(m, prior_mean_);
    var.setConstant(m, params_.signal_variance);
    if (n_ == 0 || m == 0) return;
    Eigen::MatrixXd kq;
    se_kernel(params_, xbuf_.topRows(n_), q, kq);  // n x m
    mean.noalias() += kq.transpose() * alpha_;
    Eigen::MatrixXd v = lower().solve(kq);
    var -= v.colwise().squaredNorm().transpose();
    var = var.cwiseMax(0.0);
  }
  std::pair<Eigen::VectorXd, Eigen::VectorXd> predict(std::span<const Vec2> pts) const {
    Eigen::VectorXd mean, var;
    predict(to_points(pts), mean, var);
    return {std::move(mean), std::move(var)};
  }
  Eigen::VectorXd predict_mean(const Eigen::Ref<const PointMatrix>& q) const {
    Eigen::VectorXd mean = Eigen::VectorXd::Constant(q.rows(), prior_mean_);
    if (n_ == 0 || q.rows() == 0) return mean;
    Eigen::MatrixXd kq;
    se_kernel(params_, xbuf_.topRows(n_), q, kq);
    mean.noalias() += kq.transpose() * alpha_;
    return mean;
  }

  // Registers a query lattice whose posterior means should stay cheap.
  void register_lattice(LatticePtr lattice) {
    lattice_ = std::move(lattice);
    if (!lattice_) return;
    latk_.resize(lattice_->rows(), lbuf_.rows());
    if (n_ > 0) {
      Eigen::MatrixXd cols;
      se_kernel(params_, *lattice_, xbuf_.topRows(n_), cols);
      latk_.leftCols(n_) = cols;
    }
  }
  const LatticePtr& lattice() const { return lattice_; }

  Eigen::VectorXd lattice_mean() const {
    if (!lattice_) throw ValidationError("BeliefModel: no lattice registered");
    Eigen::VectorXd mean = Eigen::VectorXd::Constant(lattice_->rows(), prior_mean_);
    if (n_ > 0) mean.noalias() += latk_.leftCols(n_) * alpha_;
    return mean;
  }

  void dump_training_csv(std::ostream& os) const {
    os.precision(17);
    for (Eigen::Index i = 0; i < n_; ++i)
      os << xbuf_(i, 0) << ',' << xbuf_(i, 1) << ',' << (ybuf_[i] + prior_mean_) << '\n';
  }

 private:
  static constexpr Eigen::Index kCloneHeadroom = 160;

  Eigen::TriangularView<const Eigen::Block<const Eigen::MatrixXd>, Eigen::Lower> lower() const {
    return lbuf_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>();
  }

  void reserve_exact(Eigen::Index cap) {
    lbuf_.resize(cap, cap);
    xbuf_.resize(cap, 2);
    ybuf_.resize(cap);
    if (lattice_) latk_.resize(lattice_->rows(), cap);
  }

  void ensure_capacity(Eigen::Index need) {
    if (need <= lbuf_.rows()) return;
    const Eigen::Index cap = std::max<Eigen::Index>(need, std::max<Eigen::Index>(2 * lbuf_.rows(), 64));
    Eigen::MatrixXd l2(cap, cap);
    l2.topLeftCorner(n_, n_) = lbuf_.topLeftCorner(n_, n_);
    lbuf_.swap(l2);
    PointMatrix x2(cap, 2);
    x2.topRows(n_) = xbuf_.topRows(n_);
    xbuf_.swap(x2);
    Eigen::VectorXd y2(cap);
    y2.head(n_) = ybuf_.head(n_);
    ybuf_.swap(y2);
    if (lattice_) {
      Eigen::MatrixXd k2(lattice_->rows(), cap);
      k2.leftCols(n_) = latk_.leftCols(n_);
      latk_.swap(k2);
    }
  }

  void refresh_alpha() {
    if (n_ == 0) {
      alpha_.resize(0);
      return;
    }
    alpha_ = lower().solve(ybuf_.head(n_));
    lbuf_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
  }

  // Core extension: appends k points, growing the Cholesky factor by a
  // block row. With y == nullptr the model conditions on its own posterior
  // means (hallucinated observations).
  void append(const Eigen::Ref<const PointMatrix>& X, const Eigen::VectorXd* y,
              const Eigen::MatrixXd* k_top, Eigen::Index k_top_rows,
              const Eigen::MatrixXd* lat_cols, Eigen::VectorXd* out_means,
              Eigen::VectorXd* out_vars) {
    const Eigen::Index k = X.rows();
    if (k == 0) return;
    if (!X.allFinite()) throw NumericError("BeliefModel: non-finite training location");
    if (y && (y->size() != k || !y->allFinite()))
      throw NumericError("BeliefModel: bad training values");

    // Cross-covariance against existing points, optionally with a
    // precomputed prefix (shared per-cell blocks during planning).
    Eigen::MatrixXd b(n_, k);
    if (k_top_rows > 0) {
      if (!k_top || k_top->rows() < k_top_rows || k_top->cols() != k || k_top_rows > n_)
        throw ValidationError("BeliefModel: bad precomputed kernel block");
      b.topRows(k_top_rows) = k_top->topRows(k_top_rows);
    }
    if (n_ > k_top_rows) {
      Eigen::MatrixXd rest;
      se_kernel(params_, xbuf_.middleRows(k_top_rows, n_ - k_top_rows), X, rest);
      b.bottomRows(n_ - k_top_rows) = rest;
    }

    Eigen::VectorXd means = Eigen::VectorXd::Constant(k, prior_mean_);
    if (n_ > 0) means.noalias() += b.transpose() * alpha_;

    Eigen::MatrixXd m;  // n x k, L^{-1} b
    Eigen::VectorXd vars = Eigen::VectorXd::Constant(k, params_.signal_variance);
    if (n_ > 0) {
      m = lower().solve(b);
      vars -= m.colwise().squaredNorm().transpose();
      vars = vars.cwiseMax(0.0);
    }

    Eigen::MatrixXd s;
    se_kernel(params_, X, X, s);
    s.diagonal().array() += params_.noise_variance + kJitter;
    if (n_ > 0) s.noalias() -= m.transpose() * m;
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success)
      throw NumericError(
          "BeliefModel: kernel matrix not positive definite (min schur diag " +
          std::to_string(s.diagonal().minCoeff()) + "); raise noise_variance");

    ensure_capacity(n_ + k);
    if (n_ > 0) lbuf_.block(n_, 0, k, n_) = m.transpose();
    lbuf_.block(n_, n_, k, k) = Eigen::MatrixXd(llt.matrixL());
    xbuf_.middleRows(n_, k) = X;
    ybuf_.segment(n_, k) = (y ? *y : means).array() - prior_mean_;
    if (lattice_) {
      if (lat_cols) {
        latk_.middleCols(n_, k) = *lat_cols;
      } else {
        Eigen::MatrixXd cols;
        se_kernel(params_, *lattice_, X, cols);
        latk_.middleCols(n_, k) = cols;
      }
    }
    n_ += k;
    refresh_alpha();

    if (out_means) *out_means = std::move(means);
    if (out_vars) *out_vars = std::move(vars);
  }

  KernelParams params_;
  double prior_mean_;
  Eigen::Index n_ = 0;
  Eigen::MatrixXd lbuf_;   // capacity x capacity; lower Cholesky in topLeft(n,n)
  PointMatrix xbuf_;       // capacity x 2
  Eigen::VectorXd ybuf_;   // capacity; values minus prior mean
  Eigen::VectorXd alpha_;  // n; K^{-1} (y - prior)
  LatticePtr lattice_;
  Eigen::MatrixXd latk_;   // |lattice| x capacity cross-kernel columns
};

}  // namespace mqe
