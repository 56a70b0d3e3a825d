#include "dissipnet/admm.hpp"

#include "dissipnet/thread_pool.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace dissipnet {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

DissipativityCertificate zero_like(const AgentDynamics& ag) {
  return {Eigen::MatrixXd::Zero(ag.n(), ag.n()),
          Eigen::MatrixXd::Zero(ag.l(), ag.l()),
          Eigen::MatrixXd::Zero(ag.l(), ag.m()),
          Eigen::MatrixXd::Zero(ag.m(), ag.m())};
}

/// Strict-passivity-shaped starting point; projected before use.
DissipativityCertificate seed_cert(const AgentDynamics& ag) {
  return {Eigen::MatrixXd::Identity(ag.n(), ag.n()),
          Eigen::MatrixXd::Zero(ag.l(), ag.l()),
          0.5 * Eigen::MatrixXd::Identity(ag.l(), ag.m()),
          Eigen::MatrixXd::Zero(ag.m(), ag.m())};
}

DissipativityCertificate cert_add(const DissipativityCertificate& a,
                                  const DissipativityCertificate& b) {
  return {a.P + b.P, a.Q + b.Q, a.S + b.S, a.R + b.R};
}

DissipativityCertificate cert_sub(const DissipativityCertificate& a,
                                  const DissipativityCertificate& b) {
  return {a.P - b.P, a.Q - b.Q, a.S - b.S, a.R - b.R};
}

double cert_norm2(const DissipativityCertificate& a) {
  return a.P.squaredNorm() + a.Q.squaredNorm() + a.S.squaredNorm() +
         a.R.squaredNorm();
}

Eigen::MatrixXd flat_stack(const std::vector<const Eigen::MatrixXd*>& parts) {
  Eigen::Index total = 0;
  for (const auto* m : parts) total += m->size();
  Eigen::VectorXd v(total);
  Eigen::Index o = 0;
  for (const auto* m : parts) {
    for (Eigen::Index i = 0; i < m->size(); ++i) v[o + i] = m->data()[i];
    o += m->size();
  }
  return v;
}

double lambda_max(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(M),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

std::string agent_name(int i) { return "agent " + std::to_string(i + 1); }
std::string clique_name(int p) { return "clique " + std::to_string(p + 1); }

const char* kNotCertifiedMsg =
    "network dissipativity test could not certify stability "
    "(sufficient condition; not a proof of instability)";

struct RunContext {
  const Network& net;
  const SolverConfig& cfg;
  NetworkShape shape;
  double eps;
  ProjectionSettings psett;
  std::vector<std::unique_ptr<KypProblem>> kyp;
  std::vector<std::unique_ptr<FixedAgentProblem>> fixedp;
  std::vector<ProjectionState> kwarm;

  explicit RunContext(const Network& n)
      : net(n),
        cfg(n.solver),
        shape(NetworkShape::of(n)),
        eps(resolve_epsilon(n.solver, n.h)),
        psett{n.solver.proj_tol, n.solver.proj_max_iter},
        kyp(n.agents.size()),
        fixedp(n.agents.size()),
        kwarm(n.agents.size()) {
    for (size_t i = 0; i < net.agents.size(); ++i) {
      if (net.agents[i].fixed_qsr)
        fixedp[i] =
            std::make_unique<FixedAgentProblem>(net.agents[i], cfg.delta_pd);
      else
        kyp[i] = std::make_unique<KypProblem>(net.agents[i], cfg.delta_pd);
    }
  }

  int n_agents() const { return static_cast<int>(net.agents.size()); }

  DissipativityCertificate project_agent(int i,
                                         const DissipativityCertificate& seed) {
    if (fixedp[i]) return fixedp[i]->project(seed.P, psett, &kwarm[i]);
    return kyp[i]->project(seed, psett, &kwarm[i]);
  }

  void init_agents(std::vector<DissipativityCertificate>& X, ThreadPool& pool,
                   const std::vector<DissipativityCertificate>* init) {
    X.resize(n_agents());
    if (init && static_cast<int>(init->size()) == n_agents()) {
      X = *init;
      for (auto& x : X) symmetrize_certificate(x);
      return;
    }
    pool.parallel_for(n_agents(), [&](int i) {
      X[i] = project_agent(i, seed_cert(net.agents[i]));
    });
  }

  std::vector<KypMembership> membership(
      const std::vector<DissipativityCertificate>& X, ThreadPool& pool) {
    std::vector<KypMembership> mem(n_agents());
    pool.parallel_for(n_agents(), [&](int i) {
      mem[i] =
          kyp_membership(net.agents[i], X[i], cfg.delta_pd, cfg.primal_tol);
    });
    return mem;
  }
};

/// Shared certification/stall bookkeeping for both drivers.
struct GateKeeper {
  int stall = 0;
  bool finish(RunOutcome& out, RunStatus status, const StabilityMargin& margin,
              std::vector<KypMembership> mem, const char* msg) {
    out.status = status;
    out.final_margin = margin;
    out.final_membership = std::move(mem);
    out.message = msg;
    return true;
  }
};

void finalize(RunOutcome& out, const std::vector<TraceRow>& trace,
              Clock::time_point t_start) {
  out.trace = trace;
  out.iterations = trace.empty() ? 0 : trace.back().k;
  out.total_seconds =
      std::chrono::duration<double>(Clock::now() - t_start).count();
  double acc = 0.0;
  for (const auto& r : trace) acc += r.t_P_ms + r.t_J_ms + r.t_D_ms;
  out.avg_iter_ms = trace.empty() ? 0.0 : acc / trace.size();
}

bool check_valid(const Network& net, RunOutcome& out) {
  const auto violations = validate_network(net);
  if (violations.empty()) return true;
  out.status = RunStatus::Error;
  out.message =
      "invalid network: " + violations[0].where + ": " + violations[0].what;
  return false;
}

}  // namespace

const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Certified: return "certified";
    case RunStatus::MaxIter: return "max_iter";
    case RunStatus::Error: return "error";
  }
  return "error";
}

RunOutcome run_alg1(const Network& net, MessageBus* bus,
                    const std::vector<DissipativityCertificate>* init) {
  RunOutcome out;
  if (!check_valid(net, out)) return out;
  const auto t_start = Clock::now();
  RunContext ctx(net);
  const SolverConfig& cfg = ctx.cfg;
  const int N = ctx.n_agents();
  GlobalStabilityProblem gprob(ctx.shape, ctx.eps);
  ProjectionState gwarm;
  ThreadPool pool(cfg.worker_count);

  out.epsilon = ctx.eps;
  out.max_projection_dim = gprob.constraint_side();
  for (const auto& ag : net.agents)
    out.max_projection_dim = std::max(out.max_projection_dim, ag.n() + ag.m());

  std::vector<DissipativityCertificate> X, Z, T(static_cast<size_t>(N));
  ctx.init_agents(X, pool, init);
  Z = X;
  for (int i = 0; i < N; ++i) T[i] = zero_like(net.agents[i]);

  std::vector<TraceRow> trace;
  trace.reserve(cfg.max_iter);
  GateKeeper gate;
  std::vector<double> tP(N), tD(N);
  bool done = false;

  for (int k = 1; k <= cfg.max_iter && !done; ++k) {
    // Agent-local projections (parallel).
    pool.parallel_for(N, [&](int i) {
      const auto t0 = Clock::now();
      X[i] = ctx.project_agent(i, cert_sub(Z[i], T[i]));
      tP[i] = ms_since(t0);
    });
    if (bus) {
      for (int i = 0; i < N; ++i) {
        bus->send(agent_name(i), "coordinator",
                  Payload::certificate(flat_stack({&X[i].Q, &X[i].S, &X[i].R})));
        bus->send(agent_name(i), "coordinator",
                  Payload::dual_slice(flat_stack({&T[i].Q, &T[i].S, &T[i].R})));
      }
    }

    // Coordinator projection of the stacked clone (storage matrices pass
    // through untouched).
    const auto tj0 = Clock::now();
    std::vector<DissipativityCertificate> Zprev = Z;
    for (int i = 0; i < N; ++i) Z[i] = cert_add(X[i], T[i]);
    gprob.project(Z, ctx.psett, &gwarm);
    const double tJ = ms_since(tj0);
    if (bus) {
      for (int i = 0; i < N; ++i)
        bus->send("coordinator", agent_name(i),
                  Payload::clone_slice(flat_stack({&Z[i].Q, &Z[i].S, &Z[i].R})));
    }

    // Dual ascent (parallel).
    pool.parallel_for(N, [&](int i) {
      const auto t0 = Clock::now();
      T[i] = cert_add(T[i], cert_sub(X[i], Z[i]));
      tD[i] = ms_since(t0);
    });

    double pr2 = 0.0, du2 = 0.0;
    for (int i = 0; i < N; ++i) {
      pr2 += cert_norm2(cert_sub(X[i], Z[i]));
      du2 += cert_norm2(cert_sub(Z[i], Zprev[i]));
    }
    const double primal = std::sqrt(pr2);
    const double dual = cfg.rho * std::sqrt(du2);

    const Eigen::MatrixXd qbar = assemble_qbar(X, net.h);
    const double lam = lambda_max(qbar);

    TraceRow row;
    row.k = k;
    row.primal_res = primal;
    row.dual_res = dual;
    row.lambda_max_qbar = lam;
    if (cfg.record_timing) {
      row.t_P_ms = *std::max_element(tP.begin(), tP.end());
      row.t_J_ms = tJ;
      row.t_D_ms = *std::max_element(tD.begin(), tD.end());
    }
    trace.push_back(row);

    if (k % cfg.check_every == 0) {
      const StabilityMargin margin = stability_margin(qbar, ctx.eps, cfg.proj_tol);
      std::vector<KypMembership> mem = ctx.membership(X, pool);
      bool kyp_ok = true;
      for (const auto& m : mem) kyp_ok = kyp_ok && m.member;
      if (bus)
        for (int i = 0; i < N; ++i)
          bus->send(agent_name(i), "coordinator",
                    Payload::scalar_residual(mem[i].kyp_lambda_max));
      if (margin.certified && kyp_ok) {
        done = gate.finish(out, RunStatus::Certified, margin, std::move(mem),
                           "stability certified");
      } else if (primal < cfg.primal_tol && dual < cfg.dual_tol) {
        if (++gate.stall >= 30)
          done = gate.finish(out, RunStatus::MaxIter, margin, std::move(mem),
                             kNotCertifiedMsg);
      } else {
        gate.stall = 0;
      }
    }
  }

  if (!done) {
    const Eigen::MatrixXd qbar = assemble_qbar(X, net.h);
    out.status = RunStatus::MaxIter;
    out.final_margin = stability_margin(qbar, ctx.eps, cfg.proj_tol);
    out.final_membership = ctx.membership(X, pool);
    out.message = kNotCertifiedMsg;
  }
  out.certificates = X;
  finalize(out, trace, t_start);
  return out;
}

namespace {

/// Registry of consensus values for the clique-split driver: every agent's
/// storage matrix, the free agents' supply-rate parts, then one value per
/// clique consensus slot.
struct Registry {
  struct Entry {
    bool is_slot = false;
    ParamRef ref{ParamKind::P, 0};
    int slot = -1;
    int rows = 0, cols = 0;
    bool symmetric = true;
  };
  std::vector<Entry> entries;
  std::map<ParamRef, int> param_index;
  int slot_base = 0;

  int of_param(const ParamRef& r) const { return param_index.at(r); }
  int of_slot(int s) const { return slot_base + s; }
};

Registry build_registry(const NetworkShape& shape,
                        const CliqueDecomposition& decomp) {
  Registry reg;
  const int N = shape.n_agents();
  auto add_param = [&](ParamKind kind, int agent, int r, int c, bool sym) {
    Registry::Entry e;
    e.ref = {kind, agent};
    e.rows = r;
    e.cols = c;
    e.symmetric = sym;
    reg.param_index[e.ref] = static_cast<int>(reg.entries.size());
    reg.entries.push_back(e);
  };
  for (int i = 0; i < N; ++i) {
    add_param(ParamKind::P, i, shape.n_dims[i], shape.n_dims[i], true);
    if (!shape.is_fixed(i)) {
      add_param(ParamKind::Q, i, shape.l_dims[i], shape.l_dims[i], true);
      add_param(ParamKind::S, i, shape.l_dims[i], shape.m_dims[i], false);
      add_param(ParamKind::R, i, shape.m_dims[i], shape.m_dims[i], true);
    }
  }
  reg.slot_base = static_cast<int>(reg.entries.size());
  for (size_t s = 0; s < decomp.y_slots.size(); ++s) {
    const auto& pos = decomp.positions[decomp.y_slots[s].position];
    Registry::Entry e;
    e.is_slot = true;
    e.slot = static_cast<int>(s);
    e.rows = shape.l_dims[pos.i];
    e.cols = shape.l_dims[pos.j];
    e.symmetric = pos.diagonal();
    reg.entries.push_back(e);
  }
  return reg;
}

struct Consumer {
  enum Type { Agent, Clique, Wworker } type;
  int id = 0;   ///< agent or clique index
  int pos = 0;  ///< value index within the consumer's local vector
};

std::vector<std::vector<Consumer>> build_consumers(
    const NetworkShape& shape, const CliqueDecomposition& decomp,
    const Registry& reg) {
  std::vector<std::vector<Consumer>> cons(reg.entries.size());
  const int N = shape.n_agents();
  for (int i = 0; i < N; ++i) {
    cons[reg.of_param({ParamKind::P, i})].push_back({Consumer::Agent, i, 0});
    if (!shape.is_fixed(i)) {
      cons[reg.of_param({ParamKind::Q, i})].push_back({Consumer::Agent, i, 0});
      cons[reg.of_param({ParamKind::S, i})].push_back({Consumer::Agent, i, 0});
      cons[reg.of_param({ParamKind::R, i})].push_back({Consumer::Agent, i, 0});
    }
  }
  for (int p = 0; p < decomp.num_cliques(); ++p) {
    const auto& params = decomp.clique_params[p];
    for (size_t q = 0; q < params.size(); ++q)
      cons[reg.of_param(params[q])].push_back(
          {Consumer::Clique, p, static_cast<int>(q)});
    const auto slots = decomp.slots_of_clique(p);
    for (size_t q = 0; q < slots.size(); ++q)
      cons[reg.of_slot(slots[q])].push_back(
          {Consumer::Clique, p, static_cast<int>(params.size() + q)});
  }
  const size_t nshared = decomp.shared_params.size();
  for (size_t q = 0; q < nshared; ++q)
    cons[reg.of_param(decomp.shared_params[q])].push_back(
        {Consumer::Wworker, 0, static_cast<int>(q)});
  for (size_t s = 0; s < decomp.y_slots.size(); ++s)
    cons[reg.of_slot(static_cast<int>(s))].push_back(
        {Consumer::Wworker, 0, static_cast<int>(nshared + s)});
  return cons;
}

}  // namespace

RunOutcome run_alg2(const Network& net, MessageBus* bus,
                    const std::vector<DissipativityCertificate>* init) {
  RunOutcome out;
  if (!check_valid(net, out)) return out;
  const auto t_start = Clock::now();
  RunContext ctx(net);
  const SolverConfig& cfg = ctx.cfg;
  const int N = ctx.n_agents();
  const NetworkShape& shape = ctx.shape;

  const CliqueDecomposition decomp = build_decomposition(shape);
  const int M = decomp.num_cliques();
  std::vector<std::unique_ptr<CliqueLmiProblem>> cprob(M);
  for (int p = 0; p < M; ++p)
    cprob[p] =
        std::make_unique<CliqueLmiProblem>(decomp, shape, p, ctx.eps);
  EqualityProblem eq(decomp, shape);

  const Registry reg = build_registry(shape, decomp);
  const auto consumers = build_consumers(shape, decomp, reg);
  const int nentries = static_cast<int>(reg.entries.size());

  out.epsilon = ctx.eps;
  out.max_projection_dim = 0;
  for (int p = 0; p < M; ++p)
    out.max_projection_dim =
        std::max(out.max_projection_dim, cprob[p]->constraint_side());
  for (const auto& ag : net.agents)
    out.max_projection_dim = std::max(out.max_projection_dim, ag.n() + ag.m());

  ThreadPool pool(cfg.worker_count);
  std::vector<DissipativityCertificate> X, T(static_cast<size_t>(N));
  ctx.init_agents(X, pool, init);
  for (int i = 0; i < N; ++i) T[i] = zero_like(net.agents[i]);

  // Consensus values.
  std::vector<Eigen::MatrixXd> J(nentries);
  for (int e = 0; e < nentries; ++e) {
    const auto& en = reg.entries[e];
    if (en.is_slot) {
      J[e] = Eigen::MatrixXd::Identity(en.rows, en.cols);
    } else {
      const auto& x = X[en.ref.agent];
      switch (en.ref.kind) {
        case ParamKind::P: J[e] = x.P; break;
        case ParamKind::Q: J[e] = x.Q; break;
        case ParamKind::S: J[e] = x.S; break;
        case ParamKind::R: J[e] = x.R; break;
      }
    }
  }

  auto gather_agent = [&](int i,
                          const std::vector<Eigen::MatrixXd>& jv)
      -> DissipativityCertificate {
    DissipativityCertificate c;
    c.P = jv[reg.of_param({ParamKind::P, i})];
    if (shape.is_fixed(i)) {
      const FixedQsr& f = shape.fixed.at(i);
      c.Q = f.Q;
      c.S = f.S;
      c.R = f.R;
    } else {
      c.Q = jv[reg.of_param({ParamKind::Q, i})];
      c.S = jv[reg.of_param({ParamKind::S, i})];
      c.R = jv[reg.of_param({ParamKind::R, i})];
    }
    return c;
  };
  auto clique_values = [&](int p, const std::vector<Eigen::MatrixXd>& jv) {
    std::vector<Eigen::MatrixXd> v;
    for (const auto& ref : decomp.clique_params[p])
      v.push_back(jv[reg.of_param(ref)]);
    for (int s : decomp.slots_of_clique(p)) v.push_back(jv[reg.of_slot(s)]);
    return v;
  };
  auto w_values = [&](const std::vector<Eigen::MatrixXd>& jv) {
    std::vector<Eigen::MatrixXd> v;
    for (const auto& ref : decomp.shared_params)
      v.push_back(jv[reg.of_param(ref)]);
    for (size_t s = 0; s < decomp.y_slots.size(); ++s)
      v.push_back(jv[reg.of_slot(static_cast<int>(s))]);
    return v;
  };

  std::vector<std::vector<Eigen::MatrixXd>> Zc(M), Uc(M);
  std::vector<ProjectionState> cwarm(M);
  for (int p = 0; p < M; ++p) {
    Zc[p] = clique_values(p, J);
    Uc[p].clear();
    for (const auto& m : Zc[p]) Uc[p].push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
  }
  Eigen::VectorXd Wv = eq.pack(w_values(J));
  Eigen::VectorXd V = Eigen::VectorXd::Zero(eq.dim());

  std::vector<TraceRow> trace;
  trace.reserve(cfg.max_iter);
  GateKeeper gate;
  const int tasks = N + M + 1;
  std::vector<double> t16(tasks), tDv(tasks), tJv(std::max(nentries, 1));
  bool done = false;

  for (int k = 1; k <= cfg.max_iter && !done; ++k) {
    // First block: agents, cliques, and the equality worker in parallel.
    pool.parallel_for(tasks, [&](int t) {
      const auto t0 = Clock::now();
      if (t < N) {
        X[t] = ctx.project_agent(t, cert_sub(gather_agent(t, J), T[t]));
      } else if (t < N + M) {
        const int p = t - N;
        std::vector<Eigen::MatrixXd> seed = clique_values(p, J);
        for (size_t q = 0; q < seed.size(); ++q) seed[q] -= Uc[p][q];
        Zc[p] = cprob[p]->project(seed, ctx.psett, &cwarm[p]);
      } else {
        Wv = eq.project(eq.pack(w_values(J)) - V);
      }
      t16[t] = ms_since(t0);
    });

    if (bus) {
      for (int i = 0; i < N; ++i) {
        std::vector<const Eigen::MatrixXd*> xs = {&X[i].P};
        std::vector<const Eigen::MatrixXd*> ts = {&T[i].P};
        if (!shape.is_fixed(i)) {
          xs.insert(xs.end(), {&X[i].Q, &X[i].S, &X[i].R});
          ts.insert(ts.end(), {&T[i].Q, &T[i].S, &T[i].R});
        }
        bus->send(agent_name(i), "coordinator",
                  Payload::certificate(flat_stack(xs)));
        bus->send(agent_name(i), "coordinator",
                  Payload::dual_slice(flat_stack(ts)));
      }
      for (int p = 0; p < M; ++p) {
        std::vector<const Eigen::MatrixXd*> zs, us;
        for (const auto& m : Zc[p]) zs.push_back(&m);
        for (const auto& m : Uc[p]) us.push_back(&m);
        bus->send(clique_name(p), "coordinator",
                  Payload::clone_slice(flat_stack(zs)));
        bus->send(clique_name(p), "coordinator",
                  Payload::dual_slice(flat_stack(us)));
      }
      const Eigen::MatrixXd wplain = Wv, vplain = V;
      bus->send("equality", "coordinator", Payload::clone_slice(wplain));
      bus->send("equality", "coordinator", Payload::dual_slice(vplain));
    }

    // Consensus averaging over each value's consumers (old duals).
    const auto tj0 = Clock::now();
    const std::vector<Eigen::MatrixXd> WplusV = eq.unpack(Wv + V);
    std::vector<Eigen::MatrixXd> Jn(nentries);
    pool.parallel_for(nentries, [&](int e) {
      const auto te0 = Clock::now();
      const auto& en = reg.entries[e];
      Eigen::MatrixXd tot = Eigen::MatrixXd::Zero(en.rows, en.cols);
      int cnt = 0;
      for (const auto& c : consumers[e]) {
        switch (c.type) {
          case Consumer::Agent: {
            const auto& x = X[c.id];
            const auto& tt = T[c.id];
            switch (en.ref.kind) {
              case ParamKind::P: tot += x.P + tt.P; break;
              case ParamKind::Q: tot += x.Q + tt.Q; break;
              case ParamKind::S: tot += x.S + tt.S; break;
              case ParamKind::R: tot += x.R + tt.R; break;
            }
            break;
          }
          case Consumer::Clique:
            tot += Zc[c.id][c.pos] + Uc[c.id][c.pos];
            break;
          case Consumer::Wworker:
            tot += WplusV[c.pos];
            break;
        }
        ++cnt;
      }
      Jn[e] = tot / static_cast<double>(cnt);
      tJv[e] = ms_since(te0);
    });
    const double tJ_wall = ms_since(tj0);
    (void)tJ_wall;

    // Dual ascent against the fresh consensus (parallel), accumulating the
    // primal residual from the dual increments.
    std::vector<double> pr2(tasks, 0.0);
    pool.parallel_for(tasks, [&](int t) {
      const auto t0 = Clock::now();
      if (t < N) {
        const DissipativityCertificate d =
            cert_sub(X[t], gather_agent(t, Jn));
        T[t] = cert_add(T[t], d);
        pr2[t] = cert_norm2(d);
      } else if (t < N + M) {
        const int p = t - N;
        const auto jbar = clique_values(p, Jn);
        double acc = 0.0;
        for (size_t q = 0; q < jbar.size(); ++q) {
          const Eigen::MatrixXd d = Zc[p][q] - jbar[q];
          Uc[p][q] += d;
          acc += d.squaredNorm();
        }
        pr2[t] = acc;
      } else {
        const Eigen::VectorXd d = Wv - eq.pack(w_values(Jn));
        V += d;
        pr2[t] = d.squaredNorm();
      }
      tDv[t] = ms_since(t0);
    });

    double prsum = 0.0, du2 = 0.0;
    for (double v : pr2) prsum += v;
    for (int e = 0; e < nentries; ++e) du2 += (Jn[e] - J[e]).squaredNorm();
    const double primal = std::sqrt(prsum);
    const double dual = cfg.rho * std::sqrt(du2);
    J = std::move(Jn);

    const Eigen::MatrixXd qbar = assemble_qbar(X, net.h);
    const double lam = lambda_max(qbar);

    TraceRow row;
    row.k = k;
    row.primal_res = primal;
    row.dual_res = dual;
    row.lambda_max_qbar = lam;
    if (cfg.record_timing) {
      row.t_P_ms = *std::max_element(t16.begin(), t16.end());
      row.t_J_ms =
          nentries > 0 ? *std::max_element(tJv.begin(), tJv.end()) : 0.0;
      row.t_D_ms = *std::max_element(tDv.begin(), tDv.end());
    }
    trace.push_back(row);

    if (k % cfg.check_every == 0) {
      const StabilityMargin margin =
          stability_margin(qbar, ctx.eps, cfg.proj_tol);
      std::vector<KypMembership> mem = ctx.membership(X, pool);
      bool kyp_ok = true;
      for (const auto& m : mem) kyp_ok = kyp_ok && m.member;
      double clique_lam = 0.0;
      for (int p = 0; p < M; ++p)
        clique_lam = std::max(
            clique_lam, lambda_max(cprob[p]->assemble(clique_values(p, J))));
      const double eqres = eq.residual(eq.pack(w_values(J)));
      if (bus) {
        for (int i = 0; i < N; ++i)
          bus->send(agent_name(i), "coordinator",
                    Payload::scalar_residual(mem[i].kyp_lambda_max));
        bus->send("equality", "coordinator", Payload::scalar_residual(eqres));
      }
      const bool split_ok =
          clique_lam <= cfg.proj_tol && eqres <= cfg.primal_tol;
      if (std::getenv("DN_DEBUG_GATE")) {
        double wk = 0.0;
        for (const auto& m : mem) wk = std::max(wk, m.kyp_lambda_max);
        std::fprintf(stderr,
                     "gate k=%d lam=%.3e eps=%.3e kyp=%.3e clique=%.3e "
                     "eq=%.3e pr=%.3e du=%.3e\n",
                     k, margin.lambda_max, ctx.eps, wk, clique_lam, eqres,
                     primal, dual);
      }
      if (margin.certified && kyp_ok && split_ok) {
        done = gate.finish(out, RunStatus::Certified, margin, std::move(mem),
                           "stability certified");
      } else if (primal < cfg.primal_tol && dual < cfg.dual_tol) {
        if (++gate.stall >= 30)
          done = gate.finish(out, RunStatus::MaxIter, margin, std::move(mem),
                             kNotCertifiedMsg);
      } else {
        gate.stall = 0;
      }
    }
  }

  if (!done) {
    const Eigen::MatrixXd qbar = assemble_qbar(X, net.h);
    out.status = RunStatus::MaxIter;
    out.final_margin = stability_margin(qbar, ctx.eps, cfg.proj_tol);
    out.final_membership = ctx.membership(X, pool);
    out.message = kNotCertifiedMsg;
  }
  out.certificates = X;
  finalize(out, trace, t_start);
  return out;
}

}  // namespace dissipnet
