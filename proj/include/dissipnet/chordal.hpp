#pragma once

#include "dissipnet/model.hpp"
#include "dissipnet/projections.hpp"

#include <map>
#include <memory>
#include <set>
#include <utility>
#include <vector>

namespace dissipnet {

/// Undirected structure graph over agent indices (0-based internally).
struct StructureGraph {
  int n = 0;
  std::set<std::pair<int, int>> edges;  ///< stored with first < second
  bool is_chordal = false;
  std::vector<int> elim_order;  ///< perfect elimination order when chordal

  bool has_edge(int i, int j) const {
    if (i == j) return false;
    return edges.count(i < j ? std::make_pair(i, j) : std::make_pair(j, i)) != 0;
  }
  void add_edge(int i, int j) {
    if (i != j) edges.insert(i < j ? std::make_pair(i, j) : std::make_pair(j, i));
  }
  std::vector<int> neighbors(int v) const;
};

/// Sparsity pattern of the stability matrix: edge {i, j} present iff H has a
/// block (i, j) or (j, i), or some agent k receives from both i and j (the two
/// columns then meet in the H'RH term).
StructureGraph build_qbar_graph(const Interconnection& h);

struct CompletionResult {
  StructureGraph graph;                       ///< chordal supergraph with PEO
  std::vector<std::pair<int, int>> fill;      ///< added edges
};

/// Minimum-degree elimination with ties broken by lowest vertex index; the
/// elimination order of the filled graph is recorded as its PEO.
CompletionResult chordal_completion(const StructureGraph& g);

/// Check that `order` is a perfect elimination ordering of g.
bool verify_peo(const StructureGraph& g, const std::vector<int>& order);

/// Maximal cliques of a chordal graph via the PEO sweep; sorted by smallest
/// member, then size, then lexicographically. Throws if g is not chordal.
std::vector<std::vector<int>> maximal_cliques(const StructureGraph& g);

/// A matrix position shared by two or more cliques. Diagonal positions
/// (i == j) arise at every vertex contained in more than one clique;
/// off-diagonal positions at every completed-graph edge inside >= 2 cliques.
struct OverlapPosition {
  int i, j;                 ///< i <= j, vertex indices
  std::vector<int> owners;  ///< owning cliques, ascending
  bool diagonal() const { return i == j; }
};

enum class ParamKind { P, Q, S, R };

struct ParamRef {
  ParamKind kind;
  int agent;
  auto operator<=>(const ParamRef&) const = default;
};

/// One consensus slot: the copy of overlap position `position` owned by
/// clique `clique`.
struct YSlot {
  int position;
  int clique;
};

/// Everything needed to split the stability constraint clique by clique: the
/// clique cover, the overlap registry with its per-clique consensus slots, and
/// the parameter partition (per-clique exclusive sets vs the shared set that
/// the equality worker couples to the slots).
struct CliqueDecomposition {
  StructureGraph structure;   ///< before completion
  StructureGraph completed;   ///< chordal, with PEO
  std::vector<std::pair<int, int>> fill;
  std::vector<std::vector<int>> cliques;  ///< ascending vertex lists
  std::vector<int> vertex_mult;           ///< #cliques containing each vertex
  std::vector<OverlapPosition> positions; ///< diagonals first, then edges
  std::vector<YSlot> y_slots;             ///< grouped by position, owner order
  std::vector<std::vector<ParamRef>> clique_params;  ///< exclusive per clique
  std::vector<ParamRef> shared_params;    ///< Q/S of shared vertices, R of
                                           ///< receivers feeding overlap blocks
  std::vector<int> overlap_receivers;      ///< the receiver set above

  int num_cliques() const { return static_cast<int>(cliques.size()); }
  /// Count of off-diagonal overlap positions (the decomposition's L).
  int overlap_edge_count() const;
  /// Index into positions, or -1 when (i, j) is not an overlap position.
  int position_index(int i, int j) const;
  /// Index into y_slots for (position, clique), or -1.
  int slot_index(int position, int clique) const;
  std::vector<int> slots_of_clique(int p) const;

  std::map<std::pair<int, int>, int> position_lookup;  ///< (i<=j) -> index
};

/// Build the full decomposition from coordinator-visible metadata. Asserts the
/// proved parameter-disjointness property (each free parameter appears in the
/// pinned entries of at most one clique); a violation is an internal bug and
/// throws logic_error.
CliqueDecomposition build_decomposition(const NetworkShape& shape);

/// Values for one clique's projection: the exclusive parameters (in
/// clique_params[p] order) followed by the clique's consensus slots (in
/// slots_of_clique order).
class CliqueLmiProblem {
 public:
  CliqueLmiProblem(const CliqueDecomposition& decomp, const NetworkShape& shape,
                   int p, double eps);

  const AffineConeProblem& problem() const { return *prob_; }
  int clique() const { return p_; }
  int constraint_side() const { return prob_->cone_side(); }
  int num_values() const { return prob_->num_blocks(); }

  /// Assemble the clique constraint matrix at the given values (exclusive
  /// params then slots). Includes the apportioned eps shift.
  Eigen::MatrixXd assemble(const std::vector<Eigen::MatrixXd>& values) const;

  std::vector<Eigen::MatrixXd> project(
      const std::vector<Eigen::MatrixXd>& seed,
      const ProjectionSettings& settings, ProjectionState* warm = nullptr,
      ProjectionStats* stats = nullptr) const;

 private:
  int p_;
  std::unique_ptr<AffineConeProblem> prob_;
  AffineConeProblem::MapFn map_;
};

/// The equality worker: closed-form Euclidean projection onto the affine set
/// {sum of a position's slots == that position's blockwise expression}, over
/// the stacked variable (shared params, then all slots).
class EqualityProblem {
 public:
  EqualityProblem(const CliqueDecomposition& decomp, const NetworkShape& shape);

  int dim() const { return d_; }
  int num_rows() const { return static_cast<int>(E_.rows()); }
  const std::vector<VarBlock>& blocks() const { return blocks_; }

  Eigen::VectorXd pack(const std::vector<Eigen::MatrixXd>& mats) const;
  std::vector<Eigen::MatrixXd> unpack(const Eigen::VectorXd& w) const;

  Eigen::VectorXd project(const Eigen::VectorXd& w) const;
  double residual(const Eigen::VectorXd& w) const;

 private:
  int d_ = 0;
  std::vector<VarBlock> blocks_;
  std::vector<int> offsets_;
  Eigen::MatrixXd E_;
  Eigen::VectorXd b_;
  Eigen::LDLT<Eigen::MatrixXd> gram_;  ///< factorization of E E'
};

/// Constructive split of a structured NSD matrix into per-clique NSD pieces
/// summing to it exactly (vertex-by-vertex elimination along the PEO, with
/// generalized Schur complements). block_dims gives each vertex's block side.
std::vector<Eigen::MatrixXd> decompose_nsd(
    const Eigen::MatrixXd& Z, const StructureGraph& chordal_graph,
    const std::vector<std::vector<int>>& cliques,
    const std::vector<int>& block_dims);

/// Sum of clique pieces scattered back to the full index set.
Eigen::MatrixXd reconstruct(const std::vector<std::vector<int>>& cliques,
                            const std::vector<Eigen::MatrixXd>& pieces,
                            const std::vector<int>& block_dims);

}  // namespace dissipnet
