#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dissipnet {

/// Externally declared supply-rate triple for an agent whose dissipativity is
/// known a priori (e.g. a passivity or gain declaration). Such agents skip the
/// KYP projection entirely; the triple is treated as constant everywhere.
struct FixedQsr {
  Eigen::MatrixXd Q;  ///< l x l symmetric
  Eigen::MatrixXd S;  ///< l x m
  Eigen::MatrixXd R;  ///< m x m symmetric
};

/// One agent's state-space realization. The matrices A, B, C, D are private to
/// the agent: they are consumed only by agent-local computations and are never
/// placed on the coordination message bus (see bus.hpp for the audit).
struct AgentDynamics {
  int index = 0;  ///< 1-based agent id; position in the network is index-1
  Eigen::MatrixXd A;  ///< n x n
  Eigen::MatrixXd B;  ///< n x m
  Eigen::MatrixXd C;  ///< l x n
  Eigen::MatrixXd D;  ///< l x m
  std::optional<FixedQsr> fixed_qsr;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int l() const { return static_cast<int>(C.rows()); }
};

/// The tuple (P, Q, S, R) certifying QSR-dissipativity of one agent. This is
/// the only payload agents ever share.
struct DissipativityCertificate {
  Eigen::MatrixXd P;  ///< n x n symmetric, P >= delta_pd * I
  Eigen::MatrixXd Q;  ///< l x l symmetric
  Eigen::MatrixXd S;  ///< l x m
  Eigen::MatrixXd R;  ///< m x m symmetric
};

/// Sparse block interconnection: e = u + H y with zero diagonal blocks.
/// Block (i, j) maps agent j's output into agent i's interconnection signal.
/// Indices are 0-based internally (file formats are 1-based).
struct Interconnection {
  int n_agents = 0;
  std::vector<int> m_dims;  ///< per-agent input dims
  std::vector<int> l_dims;  ///< per-agent output dims
  std::map<std::pair<int, int>, Eigen::MatrixXd> blocks;

  bool has_block(int i, int j) const { return blocks.count({i, j}) != 0; }
  const Eigen::MatrixXd& block(int i, int j) const { return blocks.at({i, j}); }

  /// Dense m_total x l_total realization of H.
  Eigen::MatrixXd dense() const;
  double frobenius_norm() const;
  int m_total() const;
  int l_total() const;
};

/// Solver knobs shared by both consensus drivers and the projection engine.
struct SolverConfig {
  double rho = 1.0;        ///< ADMM penalty (scales the dual residual metric)
  double epsilon = 0.0;    ///< strictness shift; 0 = derive from the network
  double delta_pd = 1e-6;  ///< positive-definiteness floor for P
  int max_iter = 20000;
  double primal_tol = 1e-6;
  double dual_tol = 1e-6;
  double proj_tol = 1e-8;
  int proj_max_iter = 5000;
  double sym_tol = 1e-10;
  int worker_count = 1;
  int check_every = 10;       ///< certification check cadence (iterations)
  bool record_timing = true;  ///< false => all trace timing columns are zero
};

/// A full analysis problem: the agents plus their interconnection.
struct Network {
  std::vector<AgentDynamics> agents;
  Interconnection h;
  SolverConfig solver;
};

/// Coordinator-visible metadata: dimensions, coupling blocks, and declared
/// supply-rate triples. Deliberately excludes every A, B, C, D so that
/// coordinator-side components cannot depend on private dynamics.
struct NetworkShape {
  std::vector<int> n_dims, m_dims, l_dims;
  Interconnection h;
  std::map<int, FixedQsr> fixed;  ///< by 0-based agent position

  static NetworkShape of(const Network& net);
  int n_agents() const { return static_cast<int>(n_dims.size()); }
  bool is_fixed(int i) const { return fixed.count(i) != 0; }
};

struct Violation {
  std::string where;  ///< agent or block identifier
  std::string what;   ///< violated rule
};

/// Structural validation: dimension consistency, forbidden diagonal blocks,
/// certificate shape rules. Pure; empty result means the network is usable.
std::vector<Violation> validate_network(const Network& net);

/// Block-diagonal stacking of per-agent (Q, S, R) in agent order.
struct CertificateStack {
  Eigen::MatrixXd Q;  ///< l_total x l_total
  Eigen::MatrixXd S;  ///< l_total x m_total
  Eigen::MatrixXd R;  ///< m_total x m_total
};
CertificateStack stack_certificates(const std::vector<DissipativityCertificate>& certs);

/// (M + M^T) / 2 — applied on ingestion so file round-trips stay symmetric.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M);

/// Symmetrize the P/Q/R parts of a certificate in place.
void symmetrize_certificate(DissipativityCertificate& cert);

/// Strictness shift used when the config leaves epsilon at 0:
/// 1e-4 * (1 + ||H||_F), so the shift stays meaningful across problem scales.
double resolve_epsilon(const SolverConfig& cfg, const Interconnection& h);

}  // namespace dissipnet
