#include "dissipnet/chordal.hpp"

#include <algorithm>
#include <stdexcept>

namespace dissipnet {

std::vector<int> StructureGraph::neighbors(int v) const {
  std::vector<int> out;
  for (const auto& [a, b] : edges) {
    if (a == v) out.push_back(b);
    else if (b == v) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

StructureGraph build_qbar_graph(const Interconnection& h) {
  StructureGraph g;
  g.n = h.n_agents;
  for (const auto& [ij, blk] : h.blocks) g.add_edge(ij.first, ij.second);
  // Sources feeding a common receiver meet in the quadratic term.
  std::vector<std::vector<int>> sources_of(h.n_agents);
  for (const auto& [ij, blk] : h.blocks)
    sources_of[ij.first].push_back(ij.second);
  for (auto& src : sources_of)
    for (size_t a = 0; a < src.size(); ++a)
      for (size_t b = a + 1; b < src.size(); ++b) g.add_edge(src[a], src[b]);
  return g;
}

namespace {

/// Maximum-cardinality search; ties broken by lowest vertex index. The visit
/// order reversed is a perfect elimination order iff the graph is chordal.
std::vector<int> mcs_order(const StructureGraph& g) {
  const int n = g.n;
  std::vector<std::set<int>> adj(n);
  for (const auto& [a, b] : g.edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  std::vector<int> weight(n, 0);
  std::vector<bool> done(n, false);
  std::vector<int> visit;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    for (int v = 0; v < n; ++v)
      if (!done[v] && (best < 0 || weight[v] > weight[best])) best = v;
    done[best] = true;
    visit.push_back(best);
    for (int u : adj[best])
      if (!done[u]) ++weight[u];
  }
  std::reverse(visit.begin(), visit.end());
  return visit;
}

}  // namespace

bool verify_peo(const StructureGraph& g, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != g.n) return false;
  std::vector<int> pos(g.n, -1);
  for (int i = 0; i < g.n; ++i) pos[order[i]] = i;
  for (int v = 0; v < g.n; ++v) {
    std::vector<int> later;
    for (int u : g.neighbors(v))
      if (pos[u] > pos[v]) later.push_back(u);
    for (size_t a = 0; a < later.size(); ++a)
      for (size_t b = a + 1; b < later.size(); ++b)
        if (!g.has_edge(later[a], later[b])) return false;
  }
  return true;
}

CompletionResult chordal_completion(const StructureGraph& g) {
  CompletionResult res;
  // Already-chordal inputs pass through untouched (with an MCS elimination
  // order), which also makes completion idempotent.
  {
    std::vector<int> peo = mcs_order(g);
    if (verify_peo(g, peo)) {
      res.graph = g;
      res.graph.is_chordal = true;
      res.graph.elim_order = peo;
      return res;
    }
  }
  const int n = g.n;
  std::vector<std::set<int>> adj(n);
  for (const auto& [a, b] : g.edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  res.graph = g;
  std::vector<bool> removed(n, false);
  std::vector<int> order;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (removed[v]) continue;
      if (best < 0 || adj[v].size() < adj[best].size()) best = v;
    }
    order.push_back(best);
    const std::vector<int> nb(adj[best].begin(), adj[best].end());
    for (size_t a = 0; a < nb.size(); ++a)
      for (size_t b = a + 1; b < nb.size(); ++b) {
        if (!adj[nb[a]].count(nb[b])) {
          adj[nb[a]].insert(nb[b]);
          adj[nb[b]].insert(nb[a]);
          res.graph.add_edge(nb[a], nb[b]);
          res.fill.emplace_back(std::min(nb[a], nb[b]),
                                std::max(nb[a], nb[b]));
        }
      }
    for (int u : nb) adj[u].erase(best);
    adj[best].clear();
    removed[best] = true;
  }
  res.graph.is_chordal = true;
  res.graph.elim_order = order;
  if (!verify_peo(res.graph, order))
    throw std::logic_error("chordal_completion: elimination order is not a PEO");
  std::sort(res.fill.begin(), res.fill.end());
  return res;
}

std::vector<std::vector<int>> maximal_cliques(const StructureGraph& g) {
  if (!g.is_chordal || g.elim_order.empty())
    throw std::invalid_argument("maximal_cliques: graph must be chordal");
  if (!verify_peo(g, g.elim_order))
    throw std::invalid_argument("maximal_cliques: invalid elimination order");
  std::vector<int> pos(g.n, -1);
  for (int i = 0; i < g.n; ++i) pos[g.elim_order[i]] = i;
  std::vector<std::vector<int>> cands;
  for (int v = 0; v < g.n; ++v) {
    std::vector<int> c = {v};
    for (int u : g.neighbors(v))
      if (pos[u] > pos[v]) c.push_back(u);
    std::sort(c.begin(), c.end());
    cands.push_back(std::move(c));
  }
  std::vector<std::vector<int>> out;
  for (size_t i = 0; i < cands.size(); ++i) {
    bool contained = false;
    for (size_t j = 0; j < cands.size() && !contained; ++j) {
      if (i == j || cands[j].size() < cands[i].size()) continue;
      if (cands[j].size() == cands[i].size() && j > i) continue;  // keep one copy
      contained = std::includes(cands[j].begin(), cands[j].end(),
                                cands[i].begin(), cands[i].end()) &&
                  cands[j] != cands[i];
      if (cands[j] == cands[i] && j < i) contained = true;  // duplicate
    }
    if (!contained) out.push_back(cands[i]);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.front() != b.front()) return a.front() < b.front();
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

int CliqueDecomposition::overlap_edge_count() const {
  int L = 0;
  for (const auto& p : positions)
    if (!p.diagonal()) ++L;
  return L;
}

int CliqueDecomposition::position_index(int i, int j) const {
  const auto key = i <= j ? std::make_pair(i, j) : std::make_pair(j, i);
  auto it = position_lookup.find(key);
  return it == position_lookup.end() ? -1 : it->second;
}

int CliqueDecomposition::slot_index(int position, int clique) const {
  for (size_t s = 0; s < y_slots.size(); ++s)
    if (y_slots[s].position == position && y_slots[s].clique == clique)
      return static_cast<int>(s);
  return -1;
}

std::vector<int> CliqueDecomposition::slots_of_clique(int p) const {
  std::vector<int> out;
  for (size_t s = 0; s < y_slots.size(); ++s)
    if (y_slots[s].clique == p) out.push_back(static_cast<int>(s));
  return out;
}

namespace {

std::vector<int> receivers_into(const Interconnection& h, int v) {
  std::vector<int> out;
  for (int k = 0; k < h.n_agents; ++k)
    if (h.has_block(k, v)) out.push_back(k);
  return out;
}

std::vector<int> shared_receivers(const Interconnection& h, int u, int v) {
  std::vector<int> out;
  for (int k = 0; k < h.n_agents; ++k)
    if (h.has_block(k, u) && h.has_block(k, v)) out.push_back(k);
  return out;
}

}  // namespace

CliqueDecomposition build_decomposition(const NetworkShape& shape) {
  CliqueDecomposition d;
  d.structure = build_qbar_graph(shape.h);
  CompletionResult comp = chordal_completion(d.structure);
  d.completed = comp.graph;
  d.fill = comp.fill;
  d.cliques = maximal_cliques(d.completed);
  const int N = shape.n_agents();
  const int M = d.num_cliques();

  d.vertex_mult.assign(N, 0);
  std::vector<std::vector<int>> cliques_of(N);
  for (int p = 0; p < M; ++p)
    for (int v : d.cliques[p]) {
      ++d.vertex_mult[v];
      cliques_of[v].push_back(p);
    }

  // Overlap positions: shared-vertex diagonals first, then shared edges.
  for (int v = 0; v < N; ++v)
    if (d.vertex_mult[v] >= 2)
      d.positions.push_back({v, v, cliques_of[v]});
  for (const auto& [a, b] : d.completed.edges) {
    std::vector<int> owners;
    std::set_intersection(cliques_of[a].begin(), cliques_of[a].end(),
                          cliques_of[b].begin(), cliques_of[b].end(),
                          std::back_inserter(owners));
    if (owners.size() >= 2) d.positions.push_back({a, b, owners});
  }
  for (size_t i = 0; i < d.positions.size(); ++i)
    d.position_lookup[{d.positions[i].i, d.positions[i].j}] =
        static_cast<int>(i);
  for (size_t i = 0; i < d.positions.size(); ++i)
    for (int p : d.positions[i].owners)
      d.y_slots.push_back({static_cast<int>(i), p});

  // Exclusive parameter sets: free parameters entering each clique's pinned
  // (single-owner) entries.
  d.clique_params.resize(M);
  for (int p = 0; p < M; ++p) {
    std::set<ParamRef> s;
    const auto& C = d.cliques[p];
    for (size_t a = 0; a < C.size(); ++a) {
      for (size_t b = a; b < C.size(); ++b) {
        const int va = C[a], vb = C[b];
        if (d.position_index(va, vb) >= 0) continue;  // consensus slot
        if (va == vb) {
          if (!shape.is_fixed(va)) s.insert({ParamKind::Q, va});
          for (int k : receivers_into(shape.h, va))
            if (!shape.is_fixed(k)) s.insert({ParamKind::R, k});
        } else {
          if (shape.h.has_block(va, vb) && !shape.is_fixed(va))
            s.insert({ParamKind::S, va});
          if (shape.h.has_block(vb, va) && !shape.is_fixed(vb))
            s.insert({ParamKind::S, vb});
          for (int k : shared_receivers(shape.h, va, vb))
            if (!shape.is_fixed(k)) s.insert({ParamKind::R, k});
        }
      }
    }
    d.clique_params[p].assign(s.begin(), s.end());
  }

  // Proved disjointness: a free parameter is pinned-used by at most one
  // clique. A violation here is an implementation bug.
  {
    std::map<ParamRef, int> owner;
    for (int p = 0; p < M; ++p)
      for (const auto& ref : d.clique_params[p]) {
        auto [it, inserted] = owner.emplace(ref, p);
        if (!inserted && it->second != p)
          throw std::logic_error(
              "decomposition: exclusive parameter sets are not disjoint");
      }
  }

  // Shared set: Q/S of every shared vertex, R of every receiver feeding an
  // overlap block (free parameters only; declared triples stay constant).
  std::set<int> vo, vr;
  for (const auto& pos : d.positions) {
    vo.insert(pos.i);
    vo.insert(pos.j);
    if (pos.diagonal()) {
      for (int k : receivers_into(shape.h, pos.i)) vr.insert(k);
    } else {
      for (int k : shared_receivers(shape.h, pos.i, pos.j)) vr.insert(k);
    }
  }
  std::set<ParamRef> sh;
  for (int v : vo)
    if (!shape.is_fixed(v)) {
      sh.insert({ParamKind::Q, v});
      sh.insert({ParamKind::S, v});
    }
  for (int k : vr)
    if (!shape.is_fixed(k)) sh.insert({ParamKind::R, k});
  d.shared_params.assign(sh.begin(), sh.end());
  d.overlap_receivers.assign(vr.begin(), vr.end());
  return d;
}

namespace {

VarBlock block_for_param(const NetworkShape& shape, const ParamRef& ref) {
  switch (ref.kind) {
    case ParamKind::P:
      return VarBlock::sym(shape.n_dims[ref.agent]);
    case ParamKind::Q:
      return VarBlock::sym(shape.l_dims[ref.agent]);
    case ParamKind::S:
      return VarBlock::rect(shape.l_dims[ref.agent], shape.m_dims[ref.agent]);
    case ParamKind::R:
      return VarBlock::sym(shape.m_dims[ref.agent]);
  }
  throw std::logic_error("unreachable");
}

VarBlock block_for_slot(const CliqueDecomposition& d, const NetworkShape& shape,
                        int slot) {
  const auto& pos = d.positions[d.y_slots[slot].position];
  if (pos.diagonal()) return VarBlock::sym(shape.l_dims[pos.i]);
  return VarBlock::rect(shape.l_dims[pos.i], shape.l_dims[pos.j]);
}

/// Evaluator for pinned blockwise expressions with fixed triples folded in.
struct PinnedEvaluator {
  const NetworkShape& shape;
  const std::map<ParamRef, const Eigen::MatrixXd*>& values;

  const Eigen::MatrixXd* lookup(ParamKind kind, int agent) const {
    auto it = values.find(ParamRef{kind, agent});
    return it == values.end() ? nullptr : it->second;
  }
  Eigen::MatrixXd get(ParamKind kind, int agent) const {
    if (const Eigen::MatrixXd* v = lookup(kind, agent)) return *v;
    auto it = shape.fixed.find(agent);
    if (it == shape.fixed.end())
      throw std::logic_error("pinned expression references unknown parameter");
    switch (kind) {
      case ParamKind::Q: return it->second.Q;
      case ParamKind::S: return it->second.S;
      case ParamKind::R: return it->second.R;
      default: throw std::logic_error("unreachable");
    }
  }

  Eigen::MatrixXd diagonal(int v) const {
    Eigen::MatrixXd blk = get(ParamKind::Q, v);
    for (int k = 0; k < shape.h.n_agents; ++k) {
      if (!shape.h.has_block(k, v)) continue;
      const Eigen::MatrixXd& Hkv = shape.h.block(k, v);
      blk += Hkv.transpose() * get(ParamKind::R, k) * Hkv;
    }
    return blk;
  }

  Eigen::MatrixXd off_diagonal(int u, int v) const {
    Eigen::MatrixXd blk =
        Eigen::MatrixXd::Zero(shape.l_dims[u], shape.l_dims[v]);
    if (shape.h.has_block(u, v))
      blk += get(ParamKind::S, u) * shape.h.block(u, v);
    if (shape.h.has_block(v, u))
      blk += shape.h.block(v, u).transpose() *
             get(ParamKind::S, v).transpose();
    for (int k = 0; k < shape.h.n_agents; ++k) {
      if (!shape.h.has_block(k, u) || !shape.h.has_block(k, v)) continue;
      blk += shape.h.block(k, u).transpose() * get(ParamKind::R, k) *
             shape.h.block(k, v);
    }
    return blk;
  }
};

}  // namespace

CliqueLmiProblem::CliqueLmiProblem(const CliqueDecomposition& decomp,
                                   const NetworkShape& shape, int p,
                                   double eps)
    : p_(p) {
  const auto params = decomp.clique_params.at(p);
  const auto slots = decomp.slots_of_clique(p);
  std::vector<VarBlock> blocks;
  for (const auto& ref : params) blocks.push_back(block_for_param(shape, ref));
  for (int s : slots) blocks.push_back(block_for_slot(decomp, shape, s));

  const std::vector<int> clique = decomp.cliques[p];
  int side = 0;
  std::vector<int> voffsets;
  for (int v : clique) {
    voffsets.push_back(side);
    side += shape.l_dims[v];
  }

  // Per-position kind within this clique: either a pinned expression or the
  // index of the consensus-slot value.
  struct Entry {
    int a, b;      ///< indices within the clique, a <= b
    int value;     ///< slot value index, or -1 for pinned
    double shift;  ///< eps multiple added on the diagonal
  };
  std::vector<Entry> entries;
  for (size_t a = 0; a < clique.size(); ++a)
    for (size_t b = a; b < clique.size(); ++b) {
      const int va = clique[a], vb = clique[b];
      const int pidx = decomp.position_index(va, vb);
      Entry e{static_cast<int>(a), static_cast<int>(b), -1, 0.0};
      if (pidx >= 0) {
        const int slot = decomp.slot_index(pidx, p);
        e.value = static_cast<int>(params.size() +
                                   (std::find(slots.begin(), slots.end(), slot) -
                                    slots.begin()));
      }
      if (va == vb)
        e.shift = eps / static_cast<double>(decomp.vertex_mult[va]);
      entries.push_back(e);
    }

  NetworkShape sh = shape;
  std::vector<ParamRef> params_copy = params;
  std::vector<int> voff = voffsets;
  std::vector<int> cl = clique;
  auto map = [sh, params_copy, entries, voff, cl,
              side](const std::vector<Eigen::MatrixXd>& v) {
    std::map<ParamRef, const Eigen::MatrixXd*> vals;
    for (size_t i = 0; i < params_copy.size(); ++i)
      vals[params_copy[i]] = &v[i];
    PinnedEvaluator ev{sh, vals};
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(side, side);
    for (const auto& e : entries) {
      const int va = cl[e.a], vb = cl[e.b];
      Eigen::MatrixXd blk;
      if (e.value >= 0) {
        blk = v[e.value];
      } else {
        blk = (va == vb) ? ev.diagonal(va) : ev.off_diagonal(va, vb);
      }
      if (va == vb)
        blk += e.shift * Eigen::MatrixXd::Identity(blk.rows(), blk.cols());
      M.block(voff[e.a], voff[e.b], blk.rows(), blk.cols()) = blk;
      if (e.a != e.b)
        M.block(voff[e.b], voff[e.a], blk.cols(), blk.rows()) =
            blk.transpose();
    }
    return M;
  };
  map_ = map;
  prob_ = std::make_unique<AffineConeProblem>(
      std::move(blocks), side, map, std::vector<AffineConeProblem::Floor>{},
      "clique " + std::to_string(p + 1));
}

Eigen::MatrixXd CliqueLmiProblem::assemble(
    const std::vector<Eigen::MatrixXd>& values) const {
  return map_(values);
}

std::vector<Eigen::MatrixXd> CliqueLmiProblem::project(
    const std::vector<Eigen::MatrixXd>& seed,
    const ProjectionSettings& settings, ProjectionState* warm,
    ProjectionStats* stats) const {
  return prob_->unpack(prob_->project(prob_->pack(seed), settings, warm, stats));
}

EqualityProblem::EqualityProblem(const CliqueDecomposition& decomp,
                                 const NetworkShape& shape) {
  for (const auto& ref : decomp.shared_params)
    blocks_.push_back(block_for_param(shape, ref));
  for (size_t s = 0; s < decomp.y_slots.size(); ++s)
    blocks_.push_back(block_for_slot(decomp, shape, static_cast<int>(s)));
  offsets_.resize(blocks_.size() + 1, 0);
  for (size_t i = 0; i < blocks_.size(); ++i)
    offsets_[i + 1] = offsets_[i] + blocks_[i].vec_size();
  d_ = offsets_.back();

  const size_t nshared = decomp.shared_params.size();
  auto resid = [&decomp, &shape, nshared,
                this](const std::vector<Eigen::MatrixXd>& v) {
    std::map<ParamRef, const Eigen::MatrixXd*> vals;
    for (size_t i = 0; i < nshared; ++i)
      vals[decomp.shared_params[i]] = &v[i];
    PinnedEvaluator ev{shape, vals};
    std::vector<double> out;
    for (size_t pi = 0; pi < decomp.positions.size(); ++pi) {
      const auto& pos = decomp.positions[pi];
      Eigen::MatrixXd T =
          pos.diagonal()
              ? Eigen::MatrixXd::Zero(shape.l_dims[pos.i], shape.l_dims[pos.i])
              : Eigen::MatrixXd::Zero(shape.l_dims[pos.i],
                                      shape.l_dims[pos.j]);
      for (size_t s = 0; s < decomp.y_slots.size(); ++s)
        if (decomp.y_slots[s].position == static_cast<int>(pi))
          T += v[nshared + s];
      T -= pos.diagonal() ? ev.diagonal(pos.i)
                          : ev.off_diagonal(pos.i, pos.j);
      if (pos.diagonal()) {
        const Eigen::VectorXd sv = svec(symmetrize(T));
        out.insert(out.end(), sv.data(), sv.data() + sv.size());
      } else {
        out.insert(out.end(), T.data(), T.data() + T.size());
      }
    }
    Eigen::VectorXd r(static_cast<Eigen::Index>(out.size()));
    for (size_t t = 0; t < out.size(); ++t)
      r[static_cast<Eigen::Index>(t)] = out[t];
    return r;
  };

  const Eigen::VectorXd r0 = resid(unpack(Eigen::VectorXd::Zero(d_)));
  const int rows = static_cast<int>(r0.size());
  b_ = -r0;
  E_.resize(rows, d_);
  for (int k = 0; k < d_; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d_);
    e[k] = 1.0;
    E_.col(k) = resid(unpack(e)) - r0;
  }
  if (rows > 0) gram_.compute(E_ * E_.transpose());
}

Eigen::VectorXd EqualityProblem::pack(
    const std::vector<Eigen::MatrixXd>& mats) const {
  if (mats.size() != blocks_.size())
    throw std::invalid_argument("equality pack: wrong block count");
  Eigen::VectorXd w(d_);
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    if (b.kind == VarBlock::Symmetric)
      w.segment(offsets_[i], b.vec_size()) = svec(mats[i]);
    else
      w.segment(offsets_[i], b.vec_size()) =
          Eigen::Map<const Eigen::VectorXd>(mats[i].data(), b.vec_size());
  }
  return w;
}

std::vector<Eigen::MatrixXd> EqualityProblem::unpack(
    const Eigen::VectorXd& w) const {
  std::vector<Eigen::MatrixXd> out;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    const auto seg = w.segment(offsets_[i], b.vec_size());
    if (b.kind == VarBlock::Symmetric)
      out.push_back(smat(seg, b.rows));
    else
      out.push_back(
          Eigen::Map<const Eigen::MatrixXd>(seg.data(), b.rows, b.cols));
  }
  return out;
}

Eigen::VectorXd EqualityProblem::project(const Eigen::VectorXd& w) const {
  if (E_.rows() == 0) return w;
  return w - E_.transpose() * gram_.solve(E_ * w - b_);
}

double EqualityProblem::residual(const Eigen::VectorXd& w) const {
  if (E_.rows() == 0) return 0.0;
  return (E_ * w - b_).norm();
}

std::vector<Eigen::MatrixXd> decompose_nsd(
    const Eigen::MatrixXd& Z, const StructureGraph& chordal_graph,
    const std::vector<std::vector<int>>& cliques,
    const std::vector<int>& block_dims) {
  if (!chordal_graph.is_chordal || chordal_graph.elim_order.empty())
    throw std::invalid_argument("decompose_nsd: graph must be chordal");
  const int n = chordal_graph.n;
  std::vector<int> off(n + 1, 0);
  for (int v = 0; v < n; ++v) off[v + 1] = off[v] + block_dims[v];
  if (Z.rows() != off[n])
    throw std::invalid_argument("decompose_nsd: matrix/dims mismatch");

  std::vector<Eigen::MatrixXd> pieces;
  std::vector<std::vector<int>> clique_pos(n);  // vertex -> index in clique
  for (const auto& C : cliques) {
    int side = 0;
    for (int v : C) side += block_dims[v];
    pieces.push_back(Eigen::MatrixXd::Zero(side, side));
  }
  // Per-clique offsets of each vertex.
  std::vector<std::map<int, int>> clique_off(cliques.size());
  for (size_t p = 0; p < cliques.size(); ++p) {
    int o = 0;
    for (int v : cliques[p]) {
      clique_off[p][v] = o;
      o += block_dims[v];
    }
  }

  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) pos[chordal_graph.elim_order[i]] = i;

  Eigen::MatrixXd Zw = symmetrize(Z);
  for (int v : chordal_graph.elim_order) {
    std::vector<int> nb;
    for (int u : chordal_graph.neighbors(v))
      if (pos[u] > pos[v]) nb.push_back(u);
    const int lv = block_dims[v];
    int wn = 0;
    for (int u : nb) wn += block_dims[u];

    Eigen::MatrixXd Zvv = symmetrize(Zw.block(off[v], off[v], lv, lv));
    Eigen::MatrixXd Zvn(lv, wn);
    {
      int c = 0;
      for (int u : nb) {
        Zvn.middleCols(c, block_dims[u]) =
            Zw.block(off[v], off[u], lv, block_dims[u]);
        c += block_dims[u];
      }
    }
    // Generalized inverse of the NSD diagonal block.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Zvv);
    const Eigen::VectorXd w = es.eigenvalues();
    const double wmax = w.cwiseAbs().maxCoeff();
    const double rank_tol = 1e-12 * std::max(1.0, wmax);
    Eigen::VectorXd winv = Eigen::VectorXd::Zero(lv);
    for (int i = 0; i < lv; ++i)
      if (std::abs(w[i]) > rank_tol) winv[i] = 1.0 / w[i];
    const Eigen::MatrixXd pinv = es.eigenvectors() * winv.asDiagonal() *
                                 es.eigenvectors().transpose();
    const Eigen::MatrixXd bottom = Zvn.transpose() * pinv * Zvn;

    // The support {v} union nb lies inside one maximal clique (PEO property).
    std::vector<int> support = nb;
    support.push_back(v);
    std::sort(support.begin(), support.end());
    int host = -1;
    for (size_t p = 0; p < cliques.size(); ++p) {
      if (std::includes(cliques[p].begin(), cliques[p].end(), support.begin(),
                        support.end())) {
        host = static_cast<int>(p);
        break;
      }
    }
    if (host < 0)
      throw std::logic_error("decompose_nsd: no clique hosts an elimination set");

    auto& piece = pieces[host];
    const auto& hoff = clique_off[host];
    piece.block(hoff.at(v), hoff.at(v), lv, lv) += Zvv;
    {
      int c = 0;
      for (int u : nb) {
        const int lu = block_dims[u];
        piece.block(hoff.at(v), hoff.at(u), lv, lu) += Zvn.middleCols(c, lu);
        piece.block(hoff.at(u), hoff.at(v), lu, lv) +=
            Zvn.middleCols(c, lu).transpose();
        c += lu;
      }
    }
    {
      int r = 0;
      for (int u : nb) {
        int c = 0;
        for (int u2 : nb) {
          piece.block(hoff.at(u), hoff.at(u2), block_dims[u], block_dims[u2]) +=
              bottom.block(r, c, block_dims[u], block_dims[u2]);
          c += block_dims[u2];
        }
        r += block_dims[u];
      }
    }

    // Remove the piece: row/column v vanish, neighbors absorb the Schur term.
    Zw.block(off[v], off[v], lv, lv).setZero();
    {
      int c = 0;
      for (int u : nb) {
        const int lu = block_dims[u];
        Zw.block(off[v], off[u], lv, lu).setZero();
        Zw.block(off[u], off[v], lu, lv).setZero();
        c += lu;
      }
    }
    {
      int r = 0;
      for (int u : nb) {
        int c = 0;
        for (int u2 : nb) {
          Zw.block(off[u], off[u2], block_dims[u], block_dims[u2]) -=
              bottom.block(r, c, block_dims[u], block_dims[u2]);
          c += block_dims[u2];
        }
        r += block_dims[u];
      }
    }
  }
  return pieces;
}

Eigen::MatrixXd reconstruct(const std::vector<std::vector<int>>& cliques,
                            const std::vector<Eigen::MatrixXd>& pieces,
                            const std::vector<int>& block_dims) {
  const int n = static_cast<int>(block_dims.size());
  std::vector<int> off(n + 1, 0);
  for (int v = 0; v < n; ++v) off[v + 1] = off[v] + block_dims[v];
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(off[n], off[n]);
  for (size_t p = 0; p < cliques.size(); ++p) {
    int r = 0;
    for (int u : cliques[p]) {
      int c = 0;
      for (int u2 : cliques[p]) {
        Z.block(off[u], off[u2], block_dims[u], block_dims[u2]) +=
            pieces[p].block(r, c, block_dims[u], block_dims[u2]);
        c += block_dims[u2];
      }
      r += block_dims[u];
    }
  }
  return Z;
}

}  // namespace dissipnet
