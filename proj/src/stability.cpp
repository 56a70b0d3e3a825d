#include "dissipnet/stability.hpp"

#include <stdexcept>

namespace dissipnet {

Eigen::MatrixXd assemble_qbar(const std::vector<DissipativityCertificate>& certs,
                              const Interconnection& h) {
  const CertificateStack st = stack_certificates(certs);
  const Eigen::MatrixXd H = h.dense();
  if (H.rows() != st.R.rows() || H.cols() != st.Q.rows())
    throw std::invalid_argument("assemble_qbar: dimension mismatch");
  Eigen::MatrixXd qbar = st.Q + st.S * H + H.transpose() * st.S.transpose() +
                         H.transpose() * st.R * H;
  return 0.5 * (qbar + qbar.transpose());
}

Eigen::MatrixXd qbar_block(int i, int j,
                           const std::vector<DissipativityCertificate>& certs,
                           const Interconnection& h) {
  const int N = h.n_agents;
  if (i < 0 || i >= N || j < 0 || j >= N)
    throw std::invalid_argument("qbar_block: index out of range");
  if (i == j) {
    Eigen::MatrixXd blk = certs[i].Q;
    for (int k = 0; k < N; ++k) {
      if (!h.has_block(k, i)) continue;
      const Eigen::MatrixXd& Hki = h.block(k, i);
      blk += Hki.transpose() * certs[k].R * Hki;
    }
    return blk;
  }
  Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(h.l_dims[i], h.l_dims[j]);
  if (h.has_block(i, j)) blk += certs[i].S * h.block(i, j);
  if (h.has_block(j, i))
    blk += h.block(j, i).transpose() * certs[j].S.transpose();
  for (int k = 0; k < N; ++k) {
    if (!h.has_block(k, i) || !h.has_block(k, j)) continue;
    blk += h.block(k, i).transpose() * certs[k].R * h.block(k, j);
  }
  return blk;
}

StabilityMargin stability_margin(const Eigen::MatrixXd& qbar, double eps,
                                 double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qbar);
  StabilityMargin m;
  m.lambda_max = es.eigenvalues().maxCoeff();
  m.certified = m.lambda_max <= -eps + tol;
  return m;
}

GlobalStabilityProblem::GlobalStabilityProblem(const NetworkShape& shape,
                                               double eps)
    : shape_(shape), eps_(eps) {
  const int N = shape_.n_agents();
  for (int i = 0; i < N; ++i)
    if (!shape_.is_fixed(i)) free_agents_.push_back(i);

  std::vector<VarBlock> blocks;
  for (int i : free_agents_) {
    blocks.push_back(VarBlock::sym(shape_.l_dims[i]));
    blocks.push_back(VarBlock::rect(shape_.l_dims[i], shape_.m_dims[i]));
    blocks.push_back(VarBlock::sym(shape_.m_dims[i]));
  }

  const NetworkShape sh = shape_;
  const std::vector<int> free_agents = free_agents_;
  const double eps_local = eps;
  const int lt = shape_.h.l_total();
  auto map = [sh, free_agents, eps_local,
              lt](const std::vector<Eigen::MatrixXd>& v) -> Eigen::MatrixXd {
    const int N = sh.n_agents();
    std::vector<DissipativityCertificate> certs(N);
    for (int i = 0; i < N; ++i) {
      certs[i].P = Eigen::MatrixXd::Zero(sh.n_dims[i], sh.n_dims[i]);
      if (sh.is_fixed(i)) {
        const FixedQsr& f = sh.fixed.at(i);
        certs[i].Q = f.Q;
        certs[i].S = f.S;
        certs[i].R = f.R;
      } else {
        certs[i].Q = Eigen::MatrixXd::Zero(sh.l_dims[i], sh.l_dims[i]);
        certs[i].S = Eigen::MatrixXd::Zero(sh.l_dims[i], sh.m_dims[i]);
        certs[i].R = Eigen::MatrixXd::Zero(sh.m_dims[i], sh.m_dims[i]);
      }
    }
    for (size_t a = 0; a < free_agents.size(); ++a) {
      certs[free_agents[a]].Q = v[3 * a];
      certs[free_agents[a]].S = v[3 * a + 1];
      certs[free_agents[a]].R = v[3 * a + 2];
    }
    return assemble_qbar(certs, sh.h) +
           eps_local * Eigen::MatrixXd::Identity(lt, lt);
  };
  prob_ = std::make_unique<AffineConeProblem>(std::move(blocks), lt,
                                              std::move(map),
                                              std::vector<AffineConeProblem::Floor>{},
                                              "global stability");
}

int GlobalStabilityProblem::constraint_side() const {
  return prob_->cone_side();
}

Eigen::VectorXd GlobalStabilityProblem::pack(
    const std::vector<DissipativityCertificate>& certs) const {
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(free_agents_.size() * 3);
  for (int i : free_agents_) {
    mats.push_back(certs[i].Q);
    mats.push_back(certs[i].S);
    mats.push_back(certs[i].R);
  }
  return prob_->pack(mats);
}

void GlobalStabilityProblem::unpack_into(
    const Eigen::VectorXd& v,
    std::vector<DissipativityCertificate>& certs) const {
  auto mats = prob_->unpack(v);
  for (size_t a = 0; a < free_agents_.size(); ++a) {
    certs[free_agents_[a]].Q = mats[3 * a];
    certs[free_agents_[a]].S = mats[3 * a + 1];
    certs[free_agents_[a]].R = mats[3 * a + 2];
  }
}

void GlobalStabilityProblem::project(
    std::vector<DissipativityCertificate>& certs,
    const ProjectionSettings& settings, ProjectionState* warm,
    ProjectionStats* stats) const {
  if (free_agents_.empty()) return;  // everything declared: nothing to move
  const Eigen::VectorXd x =
      prob_->project(pack(certs), settings, warm, stats);
  unpack_into(x, certs);
}

}  // namespace dissipnet
