#pragma once

#include "dissipnet/model.hpp"
#include "dissipnet/projections.hpp"

#include <memory>

namespace dissipnet {

/// The KYP LMI matrix for one agent at a given certificate:
///   [ A'P + PA - C'QC        PB - C'S - C'QD      ]
///   [ (PB - C'S - C'QD)'    -R - S'D - D'S - D'QD ]
/// QSR-dissipativity holds when this is NSD and P is positive definite.
Eigen::MatrixXd assemble_kyp(const AgentDynamics& agent,
                             const DissipativityCertificate& x);

struct KypMembership {
  double kyp_lambda_max = 0.0;
  double p_lambda_min = 0.0;
  bool member = false;
};

/// member iff lambda_max(KYP) <= tol and lambda_min(P) >= delta_pd - tol.
KypMembership kyp_membership(const AgentDynamics& agent,
                             const DissipativityCertificate& x,
                             double delta_pd, double tol);

/// The agent-local feasible set {(P,Q,S,R) : KYP <= 0, P >= delta_pd I} wrapped
/// as a cached projection problem. Immutable after construction; concurrent
/// projections share one instance with caller-owned warm-start state.
class KypProblem {
 public:
  KypProblem(const AgentDynamics& agent, double delta_pd);

  const AffineConeProblem& problem() const { return *prob_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int l() const { return l_; }

  Eigen::VectorXd pack(const DissipativityCertificate& x) const;
  DissipativityCertificate unpack(const Eigen::VectorXd& v) const;

  DissipativityCertificate project(const DissipativityCertificate& seed,
                                   const ProjectionSettings& settings,
                                   ProjectionState* warm = nullptr,
                                   ProjectionStats* stats = nullptr) const;

 private:
  int n_, m_, l_;
  std::unique_ptr<AffineConeProblem> prob_;
};

/// One-shot Euclidean projection of seed onto the agent's feasible set
/// (builds a fresh KypProblem; drivers cache one per agent instead).
DissipativityCertificate project_kyp(const AgentDynamics& agent,
                                     const DissipativityCertificate& seed,
                                     double delta_pd,
                                     const ProjectionSettings& settings);

/// Agent with a declared supply-rate triple: only the storage matrix is free,
/// so the feasible set is the P-section {P >= delta_pd I : KYP(P, triple) <= 0}
/// with the declared (Q, S, R) folded in as constants.
class FixedAgentProblem {
 public:
  FixedAgentProblem(const AgentDynamics& agent, double delta_pd);

  const AffineConeProblem& problem() const { return *prob_; }

  /// Project a storage-matrix seed; returns the full certificate with the
  /// declared triple attached.
  DissipativityCertificate project(const Eigen::MatrixXd& p_seed,
                                   const ProjectionSettings& settings,
                                   ProjectionState* warm = nullptr,
                                   ProjectionStats* stats = nullptr) const;

 private:
  FixedQsr qsr_;
  std::unique_ptr<AffineConeProblem> prob_;
};

/// One-shot wrapper around FixedAgentProblem (drivers cache one per agent).
DissipativityCertificate fixed_certificate(const AgentDynamics& agent,
                                           const Eigen::MatrixXd& p_seed,
                                           double delta_pd,
                                           const ProjectionSettings& settings);

/// For a Hurwitz agent, construct a guaranteed-feasible certificate of the
/// finite-gain form (Q, S, R) = (-I, 0, gamma^2 I): solve the Lyapunov
/// equation A'P + PA = -(C'C + I), then bound gamma via the Schur complement.
/// Used as an independent feasibility witness in tests.
DissipativityCertificate l2_gain_certificate(const AgentDynamics& agent);

/// Solve A'P + PA = -W for symmetric W (dense Kronecker solve; small systems).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A,
                               const Eigen::MatrixXd& W);

}  // namespace dissipnet
