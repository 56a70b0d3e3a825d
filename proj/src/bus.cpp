#include "dissipnet/bus.hpp"

#include <set>

namespace dissipnet {

namespace {
const std::set<std::string>& approved_kinds() {
  static const std::set<std::string> k = {"certificate", "clone-slice",
                                          "dual-slice", "scalar-residual"};
  return k;
}
}  // namespace

Payload Payload::certificate(Eigen::MatrixXd v) {
  return {"certificate", std::move(v), false};
}
Payload Payload::clone_slice(Eigen::MatrixXd v) {
  return {"clone-slice", std::move(v), false};
}
Payload Payload::dual_slice(Eigen::MatrixXd v) {
  return {"dual-slice", std::move(v), false};
}
Payload Payload::scalar_residual(double v) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = v;
  return {"scalar-residual", std::move(m), false};
}
Payload Payload::from_dynamics(Eigen::MatrixXd v, std::string kind) {
  return {std::move(kind), std::move(v), true};
}

void MessageBus::send(const std::string& from, const std::string& to,
                      const Payload& p) {
  records_.push_back({from, to, p.kind,
                      static_cast<long long>(p.value.size()) * 8, p.tainted});
}

AuditReport audit_messages(const std::vector<MessageRecord>& records) {
  AuditReport rep;
  rep.n_messages = static_cast<long long>(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    ++rep.kind_counts[r.kind];
    if (!approved_kinds().count(r.kind))
      rep.violations.push_back("message " + std::to_string(i) + " from " +
                               r.from + " to " + r.to +
                               " has unapproved kind '" + r.kind + "'");
    if (r.tainted)
      rep.violations.push_back("message " + std::to_string(i) + " from " +
                               r.from + " to " + r.to +
                               " carries state-space data");
  }
  rep.pass = rep.violations.empty();
  return rep;
}

}  // namespace dissipnet
