#pragma once

#include "dissipnet/model.hpp"
#include "dissipnet/projections.hpp"

#include <memory>

namespace dissipnet {

/// Dense network stability matrix Qbar = Q + S H + H'S' + H'R H built from the
/// stacked block-diagonal certificate parts.
Eigen::MatrixXd assemble_qbar(const std::vector<DissipativityCertificate>& certs,
                              const Interconnection& h);

/// Block (i, j) of the stability matrix computed from local data only:
///   diagonal:      Q_i + sum_{k: H(k,i) stored} H(k,i)' R_k H(k,i)
///   off-diagonal:  S_i H(i,j) + H(j,i)' S_j' + sum over shared receivers k of
///                  H(k,i)' R_k H(k,j)
Eigen::MatrixXd qbar_block(int i, int j,
                           const std::vector<DissipativityCertificate>& certs,
                           const Interconnection& h);

struct StabilityMargin {
  double lambda_max = 0.0;
  bool certified = false;
};

/// certified iff lambda_max(qbar) <= -eps + tol (the eps-shifted strict test).
StabilityMargin stability_margin(const Eigen::MatrixXd& qbar, double eps,
                                 double tol);

/// The centralized clone projection: Euclidean projection of the free agents'
/// stacked (Q, S, R) onto {Qbar(.) + eps I <= 0}. P blocks pass through
/// bit-exactly (the stability matrix does not involve P) and declared triples
/// stay constant. Consumes only coordinator-visible metadata — never dynamics.
class GlobalStabilityProblem {
 public:
  GlobalStabilityProblem(const NetworkShape& shape, double eps);

  const AffineConeProblem& problem() const { return *prob_; }
  int constraint_side() const;

  Eigen::VectorXd pack(const std::vector<DissipativityCertificate>& certs) const;
  /// Overwrite the free (Q, S, R) parts of certs from the packed vector.
  void unpack_into(const Eigen::VectorXd& v,
                   std::vector<DissipativityCertificate>& certs) const;

  /// In-place projection of the certificate stack; P and fixed triples are
  /// left untouched.
  void project(std::vector<DissipativityCertificate>& certs,
               const ProjectionSettings& settings,
               ProjectionState* warm = nullptr,
               ProjectionStats* stats = nullptr) const;

 private:
  NetworkShape shape_;
  double eps_;
  std::vector<int> free_agents_;
  std::unique_ptr<AffineConeProblem> prob_;
};

}  // namespace dissipnet
