#pragma once

#include "dissipnet/bus.hpp"
#include "dissipnet/chordal.hpp"
#include "dissipnet/dissipativity.hpp"
#include "dissipnet/model.hpp"
#include "dissipnet/stability.hpp"

#include <string>
#include <vector>

namespace dissipnet {

/// One line of the per-iteration convergence trace. Timing columns are the
/// parallel makespans (max over concurrent tasks) of the projection,
/// averaging, and dual phases; all zero when timing is off.
struct TraceRow {
  int k = 0;
  double primal_res = 0.0;
  double dual_res = 0.0;
  double lambda_max_qbar = 0.0;
  double t_P_ms = 0.0;
  double t_J_ms = 0.0;
  double t_D_ms = 0.0;
};

enum class RunStatus { Certified, MaxIter, Error };

struct RunOutcome {
  RunStatus status = RunStatus::Error;
  int iterations = 0;
  std::vector<DissipativityCertificate> certificates;
  std::vector<TraceRow> trace;
  double epsilon = 0.0;
  double total_seconds = 0.0;
  double avg_iter_ms = 0.0;
  int max_projection_dim = 0;
  std::string message;
  StabilityMargin final_margin;                  ///< of the stability matrix
  std::vector<KypMembership> final_membership;   ///< per agent
};

/// Consensus driver with one centralized clone of the certificate stack:
/// parallel agent-local projections, a single stability projection tying the
/// stack together, scaled duals. Certifies once the stability matrix passes
/// the strict margin test and every agent's local constraint is met.
RunOutcome run_alg1(const Network& net, MessageBus* bus = nullptr,
                    const std::vector<DissipativityCertificate>* init = nullptr);

/// Clique-split consensus driver: the stability constraint is decomposed
/// along the chordal clique cover, each clique projects its own small matrix,
/// an equality worker ties overlap slots to the blockwise expressions, and a
/// consensus average couples every copy. Same certification test as run_alg1.
RunOutcome run_alg2(const Network& net, MessageBus* bus = nullptr,
                    const std::vector<DissipativityCertificate>* init = nullptr);

const char* status_name(RunStatus s);

}  // namespace dissipnet
