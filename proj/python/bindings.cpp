#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dissipnet/admm.hpp"
#include "dissipnet/app.hpp"
#include "dissipnet/chordal.hpp"
#include "dissipnet/dissipativity.hpp"
#include "dissipnet/model.hpp"
#include "dissipnet/stability.hpp"

namespace py = pybind11;
using namespace dissipnet;

namespace {

Network network_from_parts(
    const std::vector<py::dict>& agents,
    const std::vector<std::tuple<int, int, Eigen::MatrixXd>>& couplings,
    const py::dict& solver) {
  Network net;
  for (size_t i = 0; i < agents.size(); ++i) {
    AgentDynamics ag;
    ag.index = static_cast<int>(i) + 1;
    ag.A = agents[i]["A"].cast<Eigen::MatrixXd>();
    ag.B = agents[i]["B"].cast<Eigen::MatrixXd>();
    ag.C = agents[i]["C"].cast<Eigen::MatrixXd>();
    ag.D = agents[i]["D"].cast<Eigen::MatrixXd>();
    if (agents[i].contains("fixed_qsr") && !agents[i]["fixed_qsr"].is_none()) {
      py::dict f = agents[i]["fixed_qsr"].cast<py::dict>();
      FixedQsr fx;
      fx.Q = symmetrize(f["Q"].cast<Eigen::MatrixXd>());
      fx.S = f["S"].cast<Eigen::MatrixXd>();
      fx.R = symmetrize(f["R"].cast<Eigen::MatrixXd>());
      ag.fixed_qsr = std::move(fx);
    }
    net.agents.push_back(std::move(ag));
  }
  net.h.n_agents = static_cast<int>(net.agents.size());
  for (const auto& ag : net.agents) {
    net.h.m_dims.push_back(ag.m());
    net.h.l_dims.push_back(ag.l());
  }
  for (const auto& [to, from, blk] : couplings) net.h.blocks[{to, from}] = blk;
  for (auto item : solver) {
    const std::string key = py::str(item.first);
    if (key == "rho") net.solver.rho = item.second.cast<double>();
    else if (key == "epsilon") net.solver.epsilon = item.second.cast<double>();
    else if (key == "delta_pd") net.solver.delta_pd = item.second.cast<double>();
    else if (key == "max_iter") net.solver.max_iter = item.second.cast<int>();
    else if (key == "primal_tol") net.solver.primal_tol = item.second.cast<double>();
    else if (key == "dual_tol") net.solver.dual_tol = item.second.cast<double>();
    else if (key == "proj_tol") net.solver.proj_tol = item.second.cast<double>();
    else if (key == "proj_max_iter") net.solver.proj_max_iter = item.second.cast<int>();
    else if (key == "sym_tol") net.solver.sym_tol = item.second.cast<double>();
    else if (key == "worker_count") net.solver.worker_count = item.second.cast<int>();
    else if (key == "check_every") net.solver.check_every = item.second.cast<int>();
    else if (key == "record_timing") net.solver.record_timing = item.second.cast<bool>();
    else throw std::invalid_argument("unknown solver option: " + key);
  }
  const auto violations = validate_network(net);
  if (!violations.empty())
    throw std::invalid_argument(violations[0].where + ": " + violations[0].what);
  return net;
}

py::dict outcome_to_dict(const RunOutcome& out) {
  py::dict d;
  d["status"] = status_name(out.status);
  d["certified"] = out.status == RunStatus::Certified;
  d["iterations"] = out.iterations;
  d["epsilon"] = out.epsilon;
  d["message"] = out.message;
  d["total_seconds"] = out.total_seconds;
  d["avg_iter_ms"] = out.avg_iter_ms;
  d["max_projection_dim"] = out.max_projection_dim;
  d["lambda_max_qbar"] = out.final_margin.lambda_max;
  py::list certs;
  for (const auto& c : out.certificates) {
    py::dict cd;
    cd["P"] = c.P;
    cd["Q"] = c.Q;
    cd["S"] = c.S;
    cd["R"] = c.R;
    certs.append(cd);
  }
  d["certificates"] = certs;
  py::list trace;
  for (const auto& r : out.trace) {
    py::dict rd;
    rd["k"] = r.k;
    rd["primal_res"] = r.primal_res;
    rd["dual_res"] = r.dual_res;
    rd["lambda_max_qbar"] = r.lambda_max_qbar;
    rd["t_P_ms"] = r.t_P_ms;
    rd["t_J_ms"] = r.t_J_ms;
    rd["t_D_ms"] = r.t_D_ms;
    trace.append(rd);
  }
  d["trace"] = trace;
  return d;
}

std::vector<DissipativityCertificate> certs_from_dicts(
    const std::vector<py::dict>& dicts) {
  std::vector<DissipativityCertificate> certs;
  for (const auto& cd : dicts) {
    DissipativityCertificate c;
    c.P = cd["P"].cast<Eigen::MatrixXd>();
    c.Q = cd["Q"].cast<Eigen::MatrixXd>();
    c.S = cd["S"].cast<Eigen::MatrixXd>();
    c.R = cd["R"].cast<Eigen::MatrixXd>();
    certs.push_back(std::move(c));
  }
  return certs;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Distributed stability certification for interconnected linear systems";

  py::class_<Network>(m, "Network")
      .def_property_readonly("n_agents",
                             [](const Network& net) {
                               return static_cast<int>(net.agents.size());
                             })
      .def("interconnection",
           [](const Network& net) { return net.h.dense(); });

  m.def("make_network", &network_from_parts, py::arg("agents"),
        py::arg("couplings"), py::arg("solver") = py::dict(),
        "Build a network from agent dicts (A, B, C, D, optional fixed_qsr), "
        "coupling triples (to, from, block) with 0-based endpoints, and "
        "solver overrides.");

  m.def("load_network", &load_network, py::arg("path"));
  m.def("save_network", &save_network, py::arg("net"), py::arg("path"));

  m.def(
      "analyze",
      [](const Network& net, int algorithm) {
        py::gil_scoped_release release;
        RunOutcome out = algorithm == 2 ? run_alg2(net) : run_alg1(net);
        py::gil_scoped_acquire acquire;
        return outcome_to_dict(out);
      },
      py::arg("net"), py::arg("algorithm") = 1,
      "Run the consensus certification loop; algorithm 1 projects the full "
      "stability matrix, algorithm 2 splits it along the clique tree.");

  m.def(
      "verify",
      [](const Network& net, const std::vector<py::dict>& certificates,
         double epsilon) {
        VerifyReport rep =
            verify_certificate(net, certs_from_dicts(certificates), epsilon);
        py::dict d;
        d["ok"] = rep.ok;
        d["lambda_max_qbar"] = rep.qbar_lambda_max;
        d["epsilon"] = rep.epsilon;
        d["problems"] = rep.problems;
        return d;
      },
      py::arg("net"), py::arg("certificates"), py::arg("epsilon"),
      "Re-derive every certified property of a saved certificate stack.");

  m.def(
      "decompose_info",
      [](const Network& net) {
        CliqueDecomposition decomp = build_decomposition(NetworkShape::of(net));
        py::dict d;
        d["cliques"] = decomp.cliques;
        d["fill"] = decomp.fill;
        d["overlap_edges"] = decomp.overlap_edge_count();
        d["consensus_slots"] = static_cast<int>(decomp.y_slots.size());
        return d;
      },
      py::arg("net"),
      "Clique cover, completion fill, and overlap bookkeeping for a network.");

  m.def(
      "simulate",
      [](const Network& net, const Eigen::VectorXd& x0, double t_final,
         double dt) {
        SimulationResult res = simulate_network(net, x0, t_final, dt);
        py::dict d;
        d["bounded"] = res.bounded;
        d["max_norm"] = res.max_norm;
        d["final_norm"] = res.final_norm;
        return d;
      },
      py::arg("net"), py::arg("x0"), py::arg("t_final") = 20.0,
      py::arg("dt") = 0.01);

  m.def("default_initial_state", &default_initial_state, py::arg("net"),
        py::arg("seed") = 0);

  m.def("example_uav_network", [](int subgroups) {
    UavParams params;
    params.subgroups = subgroups;
    return build_uav_network(params);
  }, py::arg("subgroups") = 4);
}
