#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace dissipnet {

/// A value crossing between workers. Payloads built from certificate slices,
/// consensus clones, duals, or residual scalars are clean; anything derived
/// from an agent's state-space data is tainted and must never be sent.
struct Payload {
  std::string kind;
  Eigen::MatrixXd value;
  bool tainted = false;

  static Payload certificate(Eigen::MatrixXd v);
  static Payload clone_slice(Eigen::MatrixXd v);
  static Payload dual_slice(Eigen::MatrixXd v);
  static Payload scalar_residual(double v);
  /// Deliberately tainted constructor: exists so tests can prove the audit
  /// rejects dynamics-bearing traffic.
  static Payload from_dynamics(Eigen::MatrixXd v, std::string kind);
};

struct MessageRecord {
  std::string from;
  std::string to;
  std::string kind;
  long long bytes = 0;
  bool tainted = false;
};

/// Records every cross-worker message of a run for later auditing.
class MessageBus {
 public:
  void send(const std::string& from, const std::string& to, const Payload& p);
  const std::vector<MessageRecord>& records() const { return records_; }
  void clear() { records_.clear(); }

 private:
  std::vector<MessageRecord> records_;
};

struct AuditReport {
  bool pass = false;
  long long n_messages = 0;
  std::map<std::string, long long> kind_counts;
  std::vector<std::string> violations;
};

/// Pass iff every message carries an approved kind and none is tainted.
AuditReport audit_messages(const std::vector<MessageRecord>& records);

}  // namespace dissipnet
