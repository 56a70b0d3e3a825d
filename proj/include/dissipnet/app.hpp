#pragma once

#include "dissipnet/admm.hpp"
#include "dissipnet/bus.hpp"
#include "dissipnet/model.hpp"

#include <string>
#include <vector>

namespace dissipnet {

// ---------- file formats ----------

/// Parse a network description (JSON; 1-based indices on disk). Throws
/// std::runtime_error with a located message on malformed input.
Network load_network(const std::string& path);
void save_network(const Network& net, const std::string& path);

struct CertificateFile {
  double epsilon = 0.0;
  int algorithm = 0;
  std::string status;
  std::vector<DissipativityCertificate> certificates;
};
void save_certificates(const CertificateFile& file, const std::string& path);
CertificateFile load_certificates(const std::string& path);

/// Fixed-format CSV (%.17g) so identical runs produce identical bytes.
void save_trace_csv(const std::vector<TraceRow>& trace,
                    const std::string& path);
std::string render_trace_csv(const std::vector<TraceRow>& trace);

void save_audit_jsonl(const std::vector<MessageRecord>& records,
                      const std::string& path);

void save_outcome_json(const RunOutcome& outcome, int algorithm, int n_agents,
                       const std::string& path);

// ---------- built-in example ----------

/// Swarm of planar vehicles in leader-follower subgroups of three; the first
/// vehicle of every later subgroup also follows the global leader.
struct UavParams {
  int subgroups = 4;
  double mass = 3.0;
  double inertia = 1.0;
  double arm = 0.2;
  double gravity = 9.81;
};
Eigen::MatrixXd uav_closed_loop(const UavParams& params);  ///< A - B K
Eigen::MatrixXd uav_coupling(const UavParams& params);     ///< B K
Network build_uav_network(const UavParams& params);

// ---------- certificate verification ----------

struct VerifyReport {
  bool ok = false;
  double qbar_lambda_max = 0.0;
  double epsilon = 0.0;
  std::vector<std::string> problems;  ///< each names the failing agent/block
};

/// Re-derive every certified property from scratch: per-agent local LMI and
/// storage floor, then the strict margin of the assembled stability matrix.
VerifyReport verify_certificate(
    const Network& net, const std::vector<DissipativityCertificate>& certs,
    double epsilon);

// ---------- closed-loop simulation ----------

struct SimulationResult {
  bool bounded = false;
  double max_norm = 0.0;
  double final_norm = 0.0;
};

/// Integrate the interconnected closed loop (zero exogenous input) from x0
/// with classic fourth-order steps; bounded iff no blow-up beyond 1e6.
SimulationResult simulate_network(const Network& net, const Eigen::VectorXd& x0,
                                  double t_final, double dt);
Eigen::VectorXd default_initial_state(const Network& net, unsigned seed);

// ---------- batch reporting ----------

struct ReportRow {
  int n_agents = 0;
  int algorithm = 0;
  int iterations = 0;
  double avg_iter_ms = 0.0;
  double total_s = 0.0;
  std::string status;
};

/// Scan a directory of run outputs (each subdirectory holding outcome.json).
std::vector<ReportRow> collect_report(const std::string& runs_dir);
std::string render_report_csv(const std::vector<ReportRow>& rows);

}  // namespace dissipnet
