#include "dissipnet/app.hpp"

#include "dissipnet/dissipativity.hpp"
#include "dissipnet/stability.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dissipnet {

namespace {

bool shape_is(const Eigen::MatrixXd& M, int r, int c) {
  return M.rows() == r && M.cols() == c;
}

std::string num(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

}  // namespace

VerifyReport verify_certificate(
    const Network& net, const std::vector<DissipativityCertificate>& certs,
    double epsilon) {
  VerifyReport rep;
  rep.epsilon = epsilon;
  const int N = static_cast<int>(net.agents.size());
  if (static_cast<int>(certs.size()) != N) {
    rep.problems.push_back("certificate count (" +
                           std::to_string(certs.size()) +
                           ") does not match agent count (" +
                           std::to_string(N) + ")");
    return rep;
  }
  bool shapes_ok = true;
  for (int i = 0; i < N; ++i) {
    const auto& ag = net.agents[i];
    const auto& c = certs[i];
    const std::string who = "agent " + std::to_string(i + 1);
    if (!shape_is(c.P, ag.n(), ag.n()) || !shape_is(c.Q, ag.l(), ag.l()) ||
        !shape_is(c.S, ag.l(), ag.m()) || !shape_is(c.R, ag.m(), ag.m())) {
      rep.problems.push_back(who + ": certificate blocks have wrong shapes");
      shapes_ok = false;
    }
  }
  if (!shapes_ok) return rep;

  constexpr double kTol = 1e-6;
  for (int i = 0; i < N; ++i) {
    const auto& ag = net.agents[i];
    const KypMembership mem =
        kyp_membership(ag, certs[i], net.solver.delta_pd, kTol);
    if (mem.kyp_lambda_max > kTol)
      rep.problems.push_back("agent " + std::to_string(i + 1) +
                             ": local dissipativity constraint violated "
                             "(lambda_max=" +
                             num(mem.kyp_lambda_max) + ")");
    if (mem.p_lambda_min < net.solver.delta_pd - kTol)
      rep.problems.push_back("agent " + std::to_string(i + 1) +
                             ": storage matrix below the positivity floor "
                             "(lambda_min=" +
                             num(mem.p_lambda_min) + ")");
    if (ag.fixed_qsr) {
      const double dq = (certs[i].Q - ag.fixed_qsr->Q).norm();
      const double ds = (certs[i].S - ag.fixed_qsr->S).norm();
      const double dr = (certs[i].R - ag.fixed_qsr->R).norm();
      if (dq + ds + dr > kTol)
        rep.problems.push_back("agent " + std::to_string(i + 1) +
                               ": declared supply-rate triple was modified");
    }
  }

  const Eigen::MatrixXd qbar = assemble_qbar(certs, net.h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(qbar),
                                                    Eigen::EigenvaluesOnly);
  rep.qbar_lambda_max = es.eigenvalues().maxCoeff();
  if (rep.qbar_lambda_max > -epsilon / 2)
    rep.problems.push_back(
        "stability matrix: lambda_max=" + num(rep.qbar_lambda_max) +
        " exceeds the certification threshold " + num(-epsilon / 2));
  rep.ok = rep.problems.empty();
  return rep;
}

SimulationResult simulate_network(const Network& net, const Eigen::VectorXd& x0,
                                  double t_final, double dt) {
  const int N = static_cast<int>(net.agents.size());
  int n_total = 0;
  for (const auto& ag : net.agents) n_total += ag.n();
  if (x0.size() != n_total)
    throw std::invalid_argument("simulate_network: initial state has size " +
                                std::to_string(x0.size()) + ", expected " +
                                std::to_string(n_total));

  // Closed loop: xdot = Abar x + Bbar e, y = Cbar x + Dbar e, e = H y
  //   =>  e = (I - H Dbar)^{-1} H Cbar x.
  const int m_total = net.h.m_total();
  const int l_total = net.h.l_total();
  Eigen::MatrixXd Abar = Eigen::MatrixXd::Zero(n_total, n_total);
  Eigen::MatrixXd Bbar = Eigen::MatrixXd::Zero(n_total, m_total);
  Eigen::MatrixXd Cbar = Eigen::MatrixXd::Zero(l_total, n_total);
  Eigen::MatrixXd Dbar = Eigen::MatrixXd::Zero(l_total, m_total);
  {
    int no = 0, mo = 0, lo = 0;
    for (int i = 0; i < N; ++i) {
      const auto& ag = net.agents[i];
      Abar.block(no, no, ag.n(), ag.n()) = ag.A;
      Bbar.block(no, mo, ag.n(), ag.m()) = ag.B;
      Cbar.block(lo, no, ag.l(), ag.n()) = ag.C;
      Dbar.block(lo, mo, ag.l(), ag.m()) = ag.D;
      no += ag.n();
      mo += ag.m();
      lo += ag.l();
    }
  }
  const Eigen::MatrixXd H = net.h.dense();
  const Eigen::MatrixXd loop =
      Eigen::MatrixXd::Identity(m_total, m_total) - H * Dbar;
  const Eigen::MatrixXd gain = loop.colPivHouseholderQr().solve(H * Cbar);
  const Eigen::MatrixXd Acl = Abar + Bbar * gain;

  SimulationResult res;
  Eigen::VectorXd x = x0;
  res.max_norm = x.norm();
  const int steps = static_cast<int>(std::ceil(t_final / dt));
  for (int s = 0; s < steps; ++s) {
    const Eigen::VectorXd k1 = Acl * x;
    const Eigen::VectorXd k2 = Acl * (x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = Acl * (x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = Acl * (x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double nrm = x.norm();
    if (!std::isfinite(nrm) || nrm > 1e6) {
      res.max_norm = std::isfinite(nrm) ? std::max(res.max_norm, nrm) : 1e300;
      res.final_norm = res.max_norm;
      res.bounded = false;
      return res;
    }
    res.max_norm = std::max(res.max_norm, nrm);
  }
  res.final_norm = x.norm();
  res.bounded = true;
  return res;
}

Eigen::VectorXd default_initial_state(const Network& net, unsigned seed) {
  int n_total = 0;
  for (const auto& ag : net.agents) n_total += ag.n();
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd x(n_total);
  for (int i = 0; i < n_total; ++i) x[i] = dist(gen);
  const double nrm = x.norm();
  if (nrm > 0) x /= nrm;
  return x;
}

}  // namespace dissipnet
