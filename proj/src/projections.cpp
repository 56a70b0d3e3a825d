#include "dissipnet/projections.hpp"

#include <cmath>
#include <stdexcept>

namespace dissipnet {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

Eigen::MatrixXd spectral_clip(const Eigen::MatrixXd& M, bool upper_at_zero,
                              double floor) {
  if (!M.allFinite())
    throw std::runtime_error("spectral projection: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral projection: eigendecomposition failed");
  Eigen::VectorXd w = es.eigenvalues();
  for (int i = 0; i < w.size(); ++i)
    w[i] = upper_at_zero ? std::min(w[i], 0.0) : std::max(w[i], floor);
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Eigen::MatrixXd project_nsd(const Eigen::MatrixXd& M) {
  return spectral_clip(M, true, 0.0);
}

Eigen::MatrixXd project_psd_floor(const Eigen::MatrixXd& M, double delta) {
  if (delta < 0)
    throw std::invalid_argument("project_psd_floor: negative floor");
  return spectral_clip(M, false, delta);
}

Eigen::VectorXd svec(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  Eigen::VectorXd v(n * (n + 1) / 2);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i)
      v[k++] = (i == j) ? M(i, j) : kSqrt2 * M(i, j);
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v, int n) {
  Eigen::MatrixXd M(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      const double x = (i == j) ? v[k] : v[k] / kSqrt2;
      M(i, j) = x;
      M(j, i) = x;
      ++k;
    }
  return M;
}

AffineConeProblem::AffineConeProblem(std::vector<VarBlock> blocks, int cone_n,
                                     MapFn map, std::vector<Floor> floors,
                                     std::string label)
    : blocks_(std::move(blocks)), cone_n_(cone_n), label_(std::move(label)) {
  offsets_.resize(blocks_.size() + 1, 0);
  for (size_t i = 0; i < blocks_.size(); ++i)
    offsets_[i + 1] = offsets_[i] + blocks_[i].vec_size();
  d_ = offsets_.back();
  cone_vec_ = cone_n_ * (cone_n_ + 1) / 2;

  // Probe the affine map: constant from map(0), columns from basis vectors.
  const Eigen::MatrixXd M0 = symmetric_check(map(unpack(Eigen::VectorXd::Zero(d_))));
  Eigen::VectorXd c_raw = svec(M0);
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M0);
    offset_lambda_max_ = es.eigenvalues().maxCoeff();
  }
  std::vector<Eigen::Triplet<double>> trips;
  double fro2 = 0.0;
  for (int k = 0; k < d_; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d_);
    e[k] = 1.0;
    Eigen::VectorXd col = svec(map(unpack(e))) - c_raw;
    for (int r = 0; r < cone_vec_; ++r) {
      if (col[r] != 0.0) {
        trips.emplace_back(r, k, col[r]);
        fro2 += col[r] * col[r];
      }
    }
  }
  scale_ = std::max(1.0, std::sqrt(fro2) / std::sqrt(double(cone_vec_)));
  for (auto& t : trips)
    t = Eigen::Triplet<double>(t.row(), t.col(), t.value() / scale_);
  A_.resize(cone_vec_, d_);
  A_.setFromTriplets(trips.begin(), trips.end());
  c_ = c_raw / scale_;

  // Stack the scaled map with identity extractors for each floored block.
  segments_.push_back({0, cone_n_, 0.0, true});
  int rows = cone_vec_;
  std::vector<Eigen::Triplet<double>> gtrips = trips;
  for (const auto& f : floors) {
    const auto& b = blocks_.at(f.block_index);
    if (b.kind != VarBlock::Symmetric)
      throw std::invalid_argument("floor on a non-symmetric block");
    if (f.delta < 0) throw std::invalid_argument("negative floor");
    const int sz = b.vec_size();
    for (int r = 0; r < sz; ++r)
      gtrips.emplace_back(rows + r, offsets_[f.block_index] + r, 1.0);
    segments_.push_back({rows, b.rows, f.delta, false});
    rows += sz;
  }
  G_.resize(rows, d_);
  G_.setFromTriplets(gtrips.begin(), gtrips.end());

  Eigen::SparseMatrix<double> I(d_, d_);
  I.setIdentity();
  Eigen::SparseMatrix<double> normal = Eigen::SparseMatrix<double>(G_.transpose()) * G_ + I;
  llt_.compute(normal);
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("projection setup: factorization failed");
}

Eigen::MatrixXd AffineConeProblem::symmetric_check(Eigen::MatrixXd M) const {
  if (M.rows() != cone_n_ || M.cols() != cone_n_)
    throw std::invalid_argument("affine map output has wrong dimensions");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1 + M.norm()))
    throw std::invalid_argument("affine map output is not symmetric");
  return 0.5 * (M + M.transpose());
}

Eigen::VectorXd AffineConeProblem::pack(
    const std::vector<Eigen::MatrixXd>& mats) const {
  if (mats.size() != blocks_.size())
    throw std::invalid_argument("pack: wrong block count");
  Eigen::VectorXd x(d_);
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    if (mats[i].rows() != b.rows || mats[i].cols() != b.cols)
      throw std::invalid_argument("pack: block dim mismatch");
    if (b.kind == VarBlock::Symmetric) {
      x.segment(offsets_[i], b.vec_size()) = svec(mats[i]);
    } else {
      x.segment(offsets_[i], b.vec_size()) =
          Eigen::Map<const Eigen::VectorXd>(mats[i].data(), b.vec_size());
    }
  }
  return x;
}

std::vector<Eigen::MatrixXd> AffineConeProblem::unpack(
    const Eigen::VectorXd& x) const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(blocks_.size());
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    const auto seg = x.segment(offsets_[i], b.vec_size());
    if (b.kind == VarBlock::Symmetric) {
      out.push_back(smat(seg, b.rows));
    } else {
      out.push_back(Eigen::Map<const Eigen::MatrixXd>(seg.data(), b.rows, b.cols));
    }
  }
  return out;
}

Eigen::MatrixXd AffineConeProblem::apply(const Eigen::VectorXd& x) const {
  return smat((A_ * x + c_) * scale_, cone_n_);
}

Eigen::VectorXd AffineConeProblem::project(const Eigen::VectorXd& seed,
                                           const ProjectionSettings& settings,
                                           ProjectionState* warm,
                                           ProjectionStats* stats) const {
  if (seed.size() != d_) throw std::invalid_argument("project: seed size");
  if (d_ == 0) return seed;
  const int rows = static_cast<int>(G_.rows());

  Eigen::VectorXd M = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd Lam = Eigen::VectorXd::Zero(rows);
  if (warm && warm->valid && warm->cone.size() == rows) {
    M = warm->cone;
    Lam = warm->dual;
  }
  Eigen::VectorXd ctil = Eigen::VectorXd::Zero(rows);
  ctil.head(cone_vec_) = c_;

  // Convergence thresholds: displacement in x, plus primal residual tight
  // enough that the unscaled constraint violation stays below the tolerance.
  const double move_thr = 0.1 * settings.tol;
  const double res_thr = 0.1 * settings.tol / scale_;

  Eigen::VectorXd x = seed;
  Eigen::VectorXd Gx(rows), V(rows);
  int it = 0;
  double move = 0.0, res = 0.0;
  bool converged = false;
  for (it = 1; it <= settings.max_iter; ++it) {
    const Eigen::VectorXd rhs = seed + G_.transpose() * (M - Lam - ctil);
    Eigen::VectorXd xn = llt_.solve(rhs);
    Gx = G_ * xn + ctil;
    V = Gx + Lam;
    for (const auto& seg : segments_) {
      const int sz = seg.side * (seg.side + 1) / 2;
      const Eigen::MatrixXd Mseg = smat(V.segment(seg.offset, sz), seg.side);
      const Eigen::MatrixXd proj = seg.nsd
                                       ? project_nsd(Mseg)
                                       : project_psd_floor(Mseg, seg.floor);
      M.segment(seg.offset, sz) = svec(proj);
    }
    Lam += Gx - M;
    move = (xn - x).norm();
    x = xn;
    res = (Gx - M).norm();
    if (move <= move_thr && res <= res_thr) {
      converged = true;
      break;
    }
  }
  if (warm) {
    warm->cone = M;
    warm->dual = Lam;
    warm->valid = true;
  }
  if (stats) {
    stats->iterations = std::min(it, settings.max_iter);
    stats->move = move;
    stats->violation = res * scale_;
    stats->converged = converged;
  }
  return x;
}

std::vector<Eigen::MatrixXd> project_affine_preimage(
    const AffineConeProblem& prob, const std::vector<Eigen::MatrixXd>& seed,
    const ProjectionSettings& settings, ProjectionState* warm,
    ProjectionStats* stats) {
  return prob.unpack(prob.project(prob.pack(seed), settings, warm, stats));
}

}  // namespace dissipnet
