#include "dissipnet/dissipativity.hpp"

#include <cmath>
#include <stdexcept>

namespace dissipnet {

Eigen::MatrixXd assemble_kyp(const AgentDynamics& agent,
                             const DissipativityCertificate& x) {
  const int n = agent.n(), m = agent.m();
  const Eigen::MatrixXd &A = agent.A, &B = agent.B, &C = agent.C, &D = agent.D;
  if (x.P.rows() != n || x.Q.rows() != agent.l() || x.R.rows() != m ||
      x.S.rows() != agent.l() || x.S.cols() != m)
    throw std::invalid_argument("assemble_kyp: certificate dim mismatch");
  Eigen::MatrixXd K(n + m, n + m);
  K.topLeftCorner(n, n) =
      A.transpose() * x.P + x.P * A - C.transpose() * x.Q * C;
  const Eigen::MatrixXd off =
      x.P * B - C.transpose() * x.S - C.transpose() * x.Q * D;
  K.topRightCorner(n, m) = off;
  K.bottomLeftCorner(m, n) = off.transpose();
  K.bottomRightCorner(m, m) = -x.R - x.S.transpose() * D -
                              D.transpose() * x.S -
                              D.transpose() * x.Q * D;
  return 0.5 * (K + K.transpose());
}

KypMembership kyp_membership(const AgentDynamics& agent,
                             const DissipativityCertificate& x,
                             double delta_pd, double tol) {
  KypMembership r;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ek(assemble_kyp(agent, x));
  r.kyp_lambda_max = ek.eigenvalues().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(symmetrize(x.P));
  r.p_lambda_min = ep.eigenvalues().minCoeff();
  r.member = r.kyp_lambda_max <= tol && r.p_lambda_min >= delta_pd - tol;
  return r;
}

KypProblem::KypProblem(const AgentDynamics& agent, double delta_pd)
    : n_(agent.n()), m_(agent.m()), l_(agent.l()) {
  // Copy the dynamics into the closure: the problem object keeps them local.
  const Eigen::MatrixXd A = agent.A, B = agent.B, C = agent.C, D = agent.D;
  std::vector<VarBlock> blocks = {VarBlock::sym(n_), VarBlock::sym(l_),
                                  VarBlock::rect(l_, m_), VarBlock::sym(m_)};
  const int n = n_, m = m_;
  auto map = [A, B, C, D, n, m](const std::vector<Eigen::MatrixXd>& v) {
    const Eigen::MatrixXd &P = v[0], &Q = v[1], &S = v[2], &R = v[3];
    Eigen::MatrixXd K(n + m, n + m);
    K.topLeftCorner(n, n) =
        A.transpose() * P + P * A - C.transpose() * Q * C;
    const Eigen::MatrixXd off =
        P * B - C.transpose() * S - C.transpose() * Q * D;
    K.topRightCorner(n, m) = off;
    K.bottomLeftCorner(m, n) = off.transpose();
    K.bottomRightCorner(m, m) =
        -R - S.transpose() * D - D.transpose() * S - D.transpose() * Q * D;
    return K;
  };
  prob_ = std::make_unique<AffineConeProblem>(
      std::move(blocks), n_ + m_, std::move(map),
      std::vector<AffineConeProblem::Floor>{{0, delta_pd}},
      "kyp agent " + std::to_string(agent.index));
}

Eigen::VectorXd KypProblem::pack(const DissipativityCertificate& x) const {
  return prob_->pack({x.P, x.Q, x.S, x.R});
}

DissipativityCertificate KypProblem::unpack(const Eigen::VectorXd& v) const {
  auto mats = prob_->unpack(v);
  return {mats[0], mats[1], mats[2], mats[3]};
}

DissipativityCertificate KypProblem::project(
    const DissipativityCertificate& seed, const ProjectionSettings& settings,
    ProjectionState* warm, ProjectionStats* stats) const {
  return unpack(prob_->project(pack(seed), settings, warm, stats));
}

DissipativityCertificate project_kyp(const AgentDynamics& agent,
                                     const DissipativityCertificate& seed,
                                     double delta_pd,
                                     const ProjectionSettings& settings) {
  if (agent.fixed_qsr)
    throw std::invalid_argument(
        "project_kyp: agent has a declared supply rate; use fixed_certificate");
  KypProblem prob(agent, delta_pd);
  return prob.project(seed, settings);
}

FixedAgentProblem::FixedAgentProblem(const AgentDynamics& agent,
                                     double delta_pd) {
  if (!agent.fixed_qsr)
    throw std::invalid_argument("FixedAgentProblem: no declared supply rate");
  qsr_ = *agent.fixed_qsr;
  const Eigen::MatrixXd A = agent.A, B = agent.B, C = agent.C, D = agent.D;
  const FixedQsr f = qsr_;
  const int n = agent.n(), m = agent.m();
  auto map = [A, B, C, D, f](const std::vector<Eigen::MatrixXd>& mats) {
    const Eigen::MatrixXd& P = mats[0];
    DissipativityCertificate x{P, f.Q, f.S, f.R};
    AgentDynamics ag;
    ag.A = A;
    ag.B = B;
    ag.C = C;
    ag.D = D;
    return assemble_kyp(ag, x);
  };
  prob_ = std::make_unique<AffineConeProblem>(
      std::vector<VarBlock>{VarBlock::sym(n)}, n + m, std::move(map),
      std::vector<AffineConeProblem::Floor>{{0, delta_pd}},
      "storage agent " + std::to_string(agent.index));
}

DissipativityCertificate FixedAgentProblem::project(
    const Eigen::MatrixXd& p_seed, const ProjectionSettings& settings,
    ProjectionState* warm, ProjectionStats* stats) const {
  const Eigen::VectorXd x =
      prob_->project(prob_->pack({symmetrize(p_seed)}), settings, warm, stats);
  return {prob_->unpack(x)[0], qsr_.Q, qsr_.S, qsr_.R};
}

DissipativityCertificate fixed_certificate(const AgentDynamics& agent,
                                           const Eigen::MatrixXd& p_seed,
                                           double delta_pd,
                                           const ProjectionSettings& settings) {
  FixedAgentProblem prob(agent, delta_pd);
  return prob.project(p_seed, settings);
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A,
                               const Eigen::MatrixXd& W) {
  const int n = static_cast<int>(A.rows());
  // Column-major vec: vec(A'P) = kron(I, A') vec(P), vec(PA) = kron(A', I) vec(P).
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n * n, n * n);
  const Eigen::MatrixXd At = A.transpose();
  for (int j = 0; j < n; ++j) M.block(j * n, j * n, n, n) += At;
  for (int c = 0; c < n; ++c)
    for (int k = 0; k < n; ++k)
      for (int r = 0; r < n; ++r) M(c * n + r, k * n + r) += At(c, k);
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(W.data(), n * n);
  Eigen::VectorXd p = M.colPivHouseholderQr().solve(-rhs);
  Eigen::MatrixXd P = Eigen::Map<const Eigen::MatrixXd>(p.data(), n, n);
  return symmetrize(P);
}

namespace {
double spectral_norm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.transpose() * M);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}
}  // namespace

DissipativityCertificate l2_gain_certificate(const AgentDynamics& agent) {
  const int n = agent.n(), m = agent.m(), l = agent.l();
  const Eigen::MatrixXd W =
      agent.C.transpose() * agent.C + Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd P = solve_lyapunov(agent.A, W);
  // With Q = -I, S = 0 the top-left KYP block equals -I; the Schur complement
  // condition reduces to gamma^2 >= ||D||^2 + ||PB + C'D||^2 (spectral norms).
  const Eigen::MatrixXd off = P * agent.B + agent.C.transpose() * agent.D;
  const double nd = spectral_norm(agent.D);
  const double no = spectral_norm(off);
  const double gamma2 = nd * nd + no * no + 1.0;
  DissipativityCertificate x;
  x.P = P;
  x.Q = -Eigen::MatrixXd::Identity(l, l);
  x.S = Eigen::MatrixXd::Zero(l, m);
  x.R = gamma2 * Eigen::MatrixXd::Identity(m, m);
  return x;
}

}  // namespace dissipnet
