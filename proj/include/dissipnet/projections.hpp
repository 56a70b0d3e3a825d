#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <functional>
#include <string>
#include <vector>

namespace dissipnet {

/// Spectral projection onto the negative-semidefinite cone:
/// eigendecompose, clip positive eigenvalues to zero, recompose.
Eigen::MatrixXd project_nsd(const Eigen::MatrixXd& M);

/// Nearest symmetric matrix whose spectrum lies at or above delta:
/// eigenvalues raised to max(lambda, delta).
Eigen::MatrixXd project_psd_floor(const Eigen::MatrixXd& M, double delta);

/// One block of a structured decision variable x.
struct VarBlock {
  enum Kind { Symmetric, Rectangular } kind;
  int rows = 0;
  int cols = 0;  ///< equals rows for Symmetric

  static VarBlock sym(int n) { return {Symmetric, n, n}; }
  static VarBlock rect(int r, int c) { return {Rectangular, r, c}; }
  int vec_size() const {
    return kind == Symmetric ? rows * (rows + 1) / 2 : rows * cols;
  }
};

/// Isometric vectorization of a symmetric matrix: upper triangle, column
/// major, off-diagonal entries scaled by sqrt(2) so that the Euclidean norm of
/// the vector equals the Frobenius norm of the matrix.
Eigen::VectorXd svec(const Eigen::MatrixXd& M);
Eigen::MatrixXd smat(const Eigen::VectorXd& v, int n);

struct ProjectionSettings {
  double tol = 1e-8;
  int max_iter = 5000;
};

struct ProjectionStats {
  int iterations = 0;
  double move = 0.0;       ///< last iterate displacement
  double violation = 0.0;  ///< estimated constraint violation (matrix scale)
  bool converged = false;
};

/// Warm-start state for repeated projections against one problem. Owned by the
/// caller (one per call site), so a shared immutable problem instance can be
/// used concurrently from many workers.
struct ProjectionState {
  Eigen::VectorXd cone;  ///< lifted cone variable
  Eigen::VectorXd dual;  ///< running multiplier
  bool valid = false;
};

/// Euclidean projection onto {x : map(x) <= 0 (NSD), floored sub-blocks}.
///
/// The affine map x -> M is probed numerically at construction (basis columns)
/// and stored sparse; the map may carry a constant offset. Projection runs a
/// splitting iteration on the lifted pair (x, M): a cached sparse Cholesky
/// solve of the normal equations couples x to the lifted variable, the lifted
/// variable is projected onto the product cone (NSD main block, floored
/// sub-blocks), and a running multiplier ties the two — converging to the
/// exact Euclidean projection, with the factorization computed once and reused
/// across all seeds.
///
/// Instances are immutable after construction and safe to share across
/// threads; per-call mutable state lives in caller-owned ProjectionState.
class AffineConeProblem {
 public:
  using MapFn =
      std::function<Eigen::MatrixXd(const std::vector<Eigen::MatrixXd>&)>;

  struct Floor {
    int block_index;  ///< which symmetric block of x
    double delta;     ///< require block >= delta * I
  };

  /// map must be affine in x and produce a symmetric cone_n x cone_n matrix.
  AffineConeProblem(std::vector<VarBlock> blocks, int cone_n, MapFn map,
                    std::vector<Floor> floors = {}, std::string label = "");

  int dim() const { return d_; }
  int cone_side() const { return cone_n_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::string& label() const { return label_; }
  /// Largest eigenvalue of the constant offset map(0) (setup diagnostic: when
  /// there are no floors and this is <= 0, the origin is a feasible point).
  double offset_lambda_max() const { return offset_lambda_max_; }

  Eigen::VectorXd pack(const std::vector<Eigen::MatrixXd>& mats) const;
  std::vector<Eigen::MatrixXd> unpack(const Eigen::VectorXd& x) const;

  /// Evaluate the affine map at x (dense, unscaled) — for verification.
  Eigen::MatrixXd apply(const Eigen::VectorXd& x) const;

  /// Project seed onto the feasible set. Returns the projected point; fills
  /// stats and updates warm when provided.
  Eigen::VectorXd project(const Eigen::VectorXd& seed,
                          const ProjectionSettings& settings,
                          ProjectionState* warm = nullptr,
                          ProjectionStats* stats = nullptr) const;

 private:
  Eigen::MatrixXd symmetric_check(Eigen::MatrixXd M) const;

  std::vector<VarBlock> blocks_;
  std::vector<int> offsets_;
  int d_ = 0;
  int cone_n_ = 0;
  int cone_vec_ = 0;
  std::string label_;
  double scale_ = 1.0;
  double offset_lambda_max_ = 0.0;
  Eigen::SparseMatrix<double> A_;  ///< scaled map, svec rows
  Eigen::VectorXd c_;              ///< scaled constant offset, svec
  struct Segment {
    int offset;
    int side;      ///< matrix side
    double floor;  ///< floor value; main cone uses NSD instead
    bool nsd;
  };
  std::vector<Segment> segments_;
  Eigen::SparseMatrix<double> G_;  ///< [A ; floor extractors]
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;  ///< I + G^T G
};

/// Convenience wrapper matching the call shape used by the drivers.
std::vector<Eigen::MatrixXd> project_affine_preimage(
    const AffineConeProblem& prob, const std::vector<Eigen::MatrixXd>& seed,
    const ProjectionSettings& settings, ProjectionState* warm = nullptr,
    ProjectionStats* stats = nullptr);

}  // namespace dissipnet
