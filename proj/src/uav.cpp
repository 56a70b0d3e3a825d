#include "dissipnet/app.hpp"

#include <stdexcept>

namespace dissipnet {

namespace {

Eigen::MatrixXd uav_plant(const UavParams& p) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
  A(0, 3) = A(1, 4) = A(2, 5) = 1.0;  // position rates
  A(3, 2) = -p.gravity;               // tilt couples into lateral acceleration
  return A;
}

Eigen::MatrixXd uav_input(const UavParams& p) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(6, 2);
  B(4, 0) = B(4, 1) = 1.0 / p.mass;
  B(5, 0) = -p.arm / p.inertia;
  B(5, 1) = p.arm / p.inertia;
  return B;
}

Eigen::MatrixXd uav_gain() {
  Eigen::MatrixXd K(2, 6);
  K << 7.07, 7.07, -49.0, 8.70, 5.12, -15.81,  //
      -7.07, 7.07, 49.0, -8.70, 5.12, 15.81;
  return K;
}

}  // namespace

Eigen::MatrixXd uav_closed_loop(const UavParams& p) {
  return uav_plant(p) - uav_input(p) * uav_gain();
}

Eigen::MatrixXd uav_coupling(const UavParams& p) {
  return uav_input(p) * uav_gain();
}

Network build_uav_network(const UavParams& p) {
  if (p.subgroups < 1)
    throw std::invalid_argument("build_uav_network: subgroups must be >= 1");
  const int N = 3 * p.subgroups;
  const Eigen::MatrixXd Acl = uav_closed_loop(p);
  const Eigen::MatrixXd BK = uav_coupling(p);

  Network net;
  for (int i = 0; i < N; ++i) {
    AgentDynamics ag;
    ag.index = i + 1;
    ag.A = Acl;
    ag.B = Eigen::MatrixXd::Identity(6, 6);
    ag.C = Eigen::MatrixXd::Identity(6, 6);
    ag.D = Eigen::MatrixXd::Zero(6, 6);
    net.agents.push_back(std::move(ag));
  }
  net.h.n_agents = N;
  net.h.m_dims.assign(N, 6);
  net.h.l_dims.assign(N, 6);
  // Within each subgroup of three, the two wing vehicles follow their
  // subgroup leader; every later subgroup leader follows the global leader.
  for (int s = 0; s < p.subgroups; ++s) {
    const int leader = 3 * s;
    net.h.blocks[{leader + 1, leader}] = BK;
    net.h.blocks[{leader + 2, leader}] = BK;
    if (s > 0) net.h.blocks[{leader, 0}] = BK;
  }
  return net;
}

}  // namespace dissipnet
