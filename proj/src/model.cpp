#include "dissipnet/model.hpp"

#include <cmath>
#include <stdexcept>

namespace dissipnet {

Eigen::MatrixXd Interconnection::dense() const {
  const int rows = m_total();
  const int cols = l_total();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(rows, cols);
  std::vector<int> moff(n_agents + 1, 0), loff(n_agents + 1, 0);
  for (int i = 0; i < n_agents; ++i) {
    moff[i + 1] = moff[i] + m_dims[i];
    loff[i + 1] = loff[i] + l_dims[i];
  }
  for (const auto& [ij, blk] : blocks) {
    H.block(moff[ij.first], loff[ij.second], blk.rows(), blk.cols()) = blk;
  }
  return H;
}

double Interconnection::frobenius_norm() const {
  double ss = 0.0;
  for (const auto& [ij, blk] : blocks) ss += blk.squaredNorm();
  return std::sqrt(ss);
}

int Interconnection::m_total() const {
  int t = 0;
  for (int v : m_dims) t += v;
  return t;
}

int Interconnection::l_total() const {
  int t = 0;
  for (int v : l_dims) t += v;
  return t;
}

NetworkShape NetworkShape::of(const Network& net) {
  NetworkShape s;
  s.h = net.h;
  for (size_t i = 0; i < net.agents.size(); ++i) {
    const auto& a = net.agents[i];
    s.n_dims.push_back(a.n());
    s.m_dims.push_back(a.m());
    s.l_dims.push_back(a.l());
    if (a.fixed_qsr) s.fixed.emplace(static_cast<int>(i), *a.fixed_qsr);
  }
  return s;
}

namespace {

bool is_symmetric(const Eigen::MatrixXd& M, double tol) {
  if (M.rows() != M.cols()) return false;
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

std::vector<Violation> validate_network(const Network& net) {
  std::vector<Violation> out;
  const double tol = net.solver.sym_tol;
  const int N = static_cast<int>(net.agents.size());

  for (int i = 0; i < N; ++i) {
    const auto& a = net.agents[i];
    const std::string who = "agent " + std::to_string(i + 1);
    if (a.index != i + 1)
      out.push_back({who, "index must be contiguous 1-based (got " +
                              std::to_string(a.index) + ")"});
    if (a.A.rows() != a.A.cols()) out.push_back({who, "A must be square"});
    if (a.B.rows() != a.A.rows())
      out.push_back({who, "dimension mismatch: rows(B) != rows(A)"});
    if (a.C.cols() != a.A.rows())
      out.push_back({who, "dimension mismatch: cols(C) != rows(A)"});
    if (a.D.rows() != a.C.rows() || a.D.cols() != a.B.cols())
      out.push_back({who, "dimension mismatch: D must be l x m"});
    if (a.fixed_qsr) {
      const auto& f = *a.fixed_qsr;
      if (f.Q.rows() != a.l() || !is_symmetric(f.Q, tol))
        out.push_back({who, "declared Q must be symmetric l x l"});
      if (f.R.rows() != a.m() || !is_symmetric(f.R, tol))
        out.push_back({who, "declared R must be symmetric m x m"});
      if (f.S.rows() != a.l() || f.S.cols() != a.m())
        out.push_back({who, "declared S must be l x m"});
    }
  }

  const auto& h = net.h;
  if (h.n_agents != N)
    out.push_back({"interconnection", "agent count mismatch"});
  if (static_cast<int>(h.m_dims.size()) == N &&
      static_cast<int>(h.l_dims.size()) == N) {
    for (int i = 0; i < N; ++i) {
      if (h.m_dims[i] != net.agents[i].m() || h.l_dims[i] != net.agents[i].l())
        out.push_back({"agent " + std::to_string(i + 1),
                       "interconnection dims disagree with agent dims"});
    }
  } else {
    out.push_back({"interconnection", "per-agent dim vectors have wrong length"});
  }
  for (const auto& [ij, blk] : h.blocks) {
    const auto [i, j] = ij;
    const std::string who =
        "H(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
    if (i == j) {
      out.push_back({who, "diagonal block forbidden"});
      continue;
    }
    if (i < 0 || i >= N || j < 0 || j >= N) {
      out.push_back({who, "index out of range"});
      continue;
    }
    if (blk.rows() != net.agents[i].m() || blk.cols() != net.agents[j].l())
      out.push_back({who, "block must be m_i x l_j"});
    if (blk.cwiseAbs().maxCoeff() == 0.0)
      out.push_back({who, "stored block is identically zero"});
  }

  const auto& c = net.solver;
  if (!(c.rho > 0 && c.delta_pd > 0 && c.max_iter > 0 && c.primal_tol > 0 &&
        c.dual_tol > 0 && c.proj_tol > 0 && c.proj_max_iter > 0 &&
        c.sym_tol > 0 && c.worker_count > 0 && c.check_every > 0 &&
        c.epsilon >= 0))
    out.push_back({"solver", "all solver parameters must be positive"});
  if (!(c.proj_tol < c.primal_tol))
    out.push_back({"solver", "proj_tol must be smaller than primal_tol"});
  return out;
}

CertificateStack stack_certificates(
    const std::vector<DissipativityCertificate>& certs) {
  if (certs.empty())
    throw std::invalid_argument("stack_certificates: empty certificate list");
  int lt = 0, mt = 0;
  for (const auto& c : certs) {
    lt += static_cast<int>(c.Q.rows());
    mt += static_cast<int>(c.R.rows());
  }
  CertificateStack st;
  st.Q = Eigen::MatrixXd::Zero(lt, lt);
  st.S = Eigen::MatrixXd::Zero(lt, mt);
  st.R = Eigen::MatrixXd::Zero(mt, mt);
  int lo = 0, mo = 0;
  for (const auto& c : certs) {
    const int l = static_cast<int>(c.Q.rows());
    const int m = static_cast<int>(c.R.rows());
    if (c.S.rows() != l || c.S.cols() != m)
      throw std::invalid_argument("stack_certificates: S block dim mismatch");
    st.Q.block(lo, lo, l, l) = c.Q;
    st.S.block(lo, mo, l, m) = c.S;
    st.R.block(mo, mo, m, m) = c.R;
    lo += l;
    mo += m;
  }
  return st;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

void symmetrize_certificate(DissipativityCertificate& cert) {
  cert.P = symmetrize(cert.P);
  cert.Q = symmetrize(cert.Q);
  cert.R = symmetrize(cert.R);
}

double resolve_epsilon(const SolverConfig& cfg, const Interconnection& h) {
  if (cfg.epsilon > 0) return cfg.epsilon;
  return 1e-4 * (1.0 + h.frobenius_norm());
}

}  // namespace dissipnet
