#include "dissipnet/app.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dissipnet {

namespace {

using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd json_to_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw std::runtime_error(where + ": expected a non-empty array of rows");
  const size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty())
    throw std::runtime_error(where + ": rows must be non-empty arrays");
  const size_t cols = j[0].size();
  Eigen::MatrixXd M(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw std::runtime_error(where + ": ragged rows");
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw std::runtime_error(where + ": non-numeric entry");
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          j[r][c].get<double>();
    }
  }
  return M;
}

void read_solver(const json& j, SolverConfig& cfg) {
  auto num = [&](const char* key, double& slot) {
    if (j.contains(key) && !j[key].is_null()) slot = j[key].get<double>();
  };
  auto integer = [&](const char* key, int& slot) {
    if (j.contains(key) && !j[key].is_null()) slot = j[key].get<int>();
  };
  num("rho", cfg.rho);
  if (j.contains("epsilon")) {
    cfg.epsilon = j["epsilon"].is_null() ? 0.0 : j["epsilon"].get<double>();
  }
  num("delta_pd", cfg.delta_pd);
  integer("max_iter", cfg.max_iter);
  num("primal_tol", cfg.primal_tol);
  num("dual_tol", cfg.dual_tol);
  num("proj_tol", cfg.proj_tol);
  integer("proj_max_iter", cfg.proj_max_iter);
  num("sym_tol", cfg.sym_tol);
  integer("worker_count", cfg.worker_count);
  integer("check_every", cfg.check_every);
  if (j.contains("record_timing") && !j["record_timing"].is_null())
    cfg.record_timing = j["record_timing"].get<bool>();
}

json solver_to_json(const SolverConfig& cfg) {
  return json{{"rho", cfg.rho},
              {"epsilon", cfg.epsilon},
              {"delta_pd", cfg.delta_pd},
              {"max_iter", cfg.max_iter},
              {"primal_tol", cfg.primal_tol},
              {"dual_tol", cfg.dual_tol},
              {"proj_tol", cfg.proj_tol},
              {"proj_max_iter", cfg.proj_max_iter},
              {"sym_tol", cfg.sym_tol},
              {"worker_count", cfg.worker_count},
              {"check_every", cfg.check_every},
              {"record_timing", cfg.record_timing}};
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Network load_network(const std::string& path) {
  const json j = read_json(path);
  Network net;
  if (!j.contains("agents") || !j["agents"].is_array() || j["agents"].empty())
    throw std::runtime_error(path + ": missing agents array");
  for (const auto& a : j["agents"]) {
    AgentDynamics ag;
    if (!a.contains("index"))
      throw std::runtime_error(path + ": agent without index");
    ag.index = a["index"].get<int>();
    const std::string where = path + ": agent " + std::to_string(ag.index);
    ag.A = json_to_matrix(a.at("A"), where + " A");
    ag.B = json_to_matrix(a.at("B"), where + " B");
    ag.C = json_to_matrix(a.at("C"), where + " C");
    ag.D = json_to_matrix(a.at("D"), where + " D");
    for (const char* key : {"n", "m", "l"}) {
      if (!a.contains(key)) continue;
      const int declared = a[key].get<int>();
      const int actual = key[0] == 'n' ? ag.n() : key[0] == 'm' ? ag.m() : ag.l();
      if (declared != actual)
        throw std::runtime_error(where + ": declared " + key + "=" +
                                 std::to_string(declared) +
                                 " does not match matrix shapes (" +
                                 std::to_string(actual) + ")");
    }
    if (a.contains("fixed_qsr") && !a["fixed_qsr"].is_null()) {
      FixedQsr f;
      f.Q = symmetrize(json_to_matrix(a["fixed_qsr"].at("Q"), where + " fixed Q"));
      f.S = json_to_matrix(a["fixed_qsr"].at("S"), where + " fixed S");
      f.R = symmetrize(json_to_matrix(a["fixed_qsr"].at("R"), where + " fixed R"));
      ag.fixed_qsr = std::move(f);
    }
    net.agents.push_back(std::move(ag));
  }
  std::sort(net.agents.begin(), net.agents.end(),
            [](const AgentDynamics& a, const AgentDynamics& b) {
              return a.index < b.index;
            });
  net.h.n_agents = static_cast<int>(net.agents.size());
  for (const auto& ag : net.agents) {
    net.h.m_dims.push_back(ag.m());
    net.h.l_dims.push_back(ag.l());
  }
  if (j.contains("H")) {
    if (!j["H"].is_array()) throw std::runtime_error(path + ": H must be an array");
    for (const auto& b : j["H"]) {
      const int fi = b.at("i").get<int>();
      const int fj = b.at("j").get<int>();
      const std::string where =
          path + ": H block (" + std::to_string(fi) + "," + std::to_string(fj) + ")";
      if (fi < 1 || fj < 1 || fi > net.h.n_agents || fj > net.h.n_agents)
        throw std::runtime_error(where + ": index out of range");
      const std::pair<int, int> key{fi - 1, fj - 1};
      if (net.h.blocks.count(key))
        throw std::runtime_error(where + ": duplicate block");
      net.h.blocks[key] = json_to_matrix(b.at("block"), where);
    }
  }
  if (j.contains("solver") && !j["solver"].is_null())
    read_solver(j["solver"], net.solver);
  const auto violations = validate_network(net);
  if (!violations.empty())
    throw std::runtime_error(path + ": " + violations[0].where + ": " +
                             violations[0].what);
  return net;
}

void save_network(const Network& net, const std::string& path) {
  json j;
  j["agents"] = json::array();
  for (const auto& ag : net.agents) {
    json a{{"index", ag.index}, {"n", ag.n()},        {"m", ag.m()},
           {"l", ag.l()},       {"A", matrix_to_json(ag.A)},
           {"B", matrix_to_json(ag.B)},
           {"C", matrix_to_json(ag.C)},
           {"D", matrix_to_json(ag.D)}};
    if (ag.fixed_qsr) {
      a["fixed_qsr"] = json{{"Q", matrix_to_json(ag.fixed_qsr->Q)},
                            {"S", matrix_to_json(ag.fixed_qsr->S)},
                            {"R", matrix_to_json(ag.fixed_qsr->R)}};
    } else {
      a["fixed_qsr"] = nullptr;
    }
    j["agents"].push_back(std::move(a));
  }
  j["H"] = json::array();
  for (const auto& [key, blk] : net.h.blocks) {
    j["H"].push_back(json{{"i", key.first + 1},
                          {"j", key.second + 1},
                          {"block", matrix_to_json(blk)}});
  }
  j["solver"] = solver_to_json(net.solver);
  write_text(path, j.dump(2) + "\n");
}

void save_certificates(const CertificateFile& file, const std::string& path) {
  json j{{"epsilon", file.epsilon},
         {"algorithm", file.algorithm},
         {"status", file.status}};
  j["agents"] = json::array();
  for (size_t i = 0; i < file.certificates.size(); ++i) {
    const auto& c = file.certificates[i];
    j["agents"].push_back(json{{"index", static_cast<int>(i) + 1},
                               {"P", matrix_to_json(c.P)},
                               {"Q", matrix_to_json(c.Q)},
                               {"S", matrix_to_json(c.S)},
                               {"R", matrix_to_json(c.R)}});
  }
  write_text(path, j.dump(2) + "\n");
}

CertificateFile load_certificates(const std::string& path) {
  const json j = read_json(path);
  CertificateFile file;
  file.epsilon = j.value("epsilon", 0.0);
  file.algorithm = j.value("algorithm", 0);
  file.status = j.value("status", std::string{});
  if (!j.contains("agents") || !j["agents"].is_array())
    throw std::runtime_error(path + ": missing agents array");
  std::vector<std::pair<int, DissipativityCertificate>> rows;
  for (const auto& a : j["agents"]) {
    const int idx = a.at("index").get<int>();
    const std::string where = path + ": certificate " + std::to_string(idx);
    DissipativityCertificate c;
    c.P = json_to_matrix(a.at("P"), where + " P");
    c.Q = json_to_matrix(a.at("Q"), where + " Q");
    c.S = json_to_matrix(a.at("S"), where + " S");
    c.R = json_to_matrix(a.at("R"), where + " R");
    rows.emplace_back(idx, std::move(c));
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [idx, c] : rows) file.certificates.push_back(std::move(c));
  return file;
}

std::string render_trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "k,primal_res,dual_res,lambda_max_qbar,t_P_ms,t_J_ms,t_D_ms\n";
  for (const auto& r : trace) {
    out << r.k << ',' << fmt17(r.primal_res) << ',' << fmt17(r.dual_res) << ','
        << fmt17(r.lambda_max_qbar) << ',' << fmt17(r.t_P_ms) << ','
        << fmt17(r.t_J_ms) << ',' << fmt17(r.t_D_ms) << '\n';
  }
  return out.str();
}

void save_trace_csv(const std::vector<TraceRow>& trace,
                    const std::string& path) {
  write_text(path, render_trace_csv(trace));
}

void save_audit_jsonl(const std::vector<MessageRecord>& records,
                      const std::string& path) {
  std::ostringstream out;
  for (const auto& r : records) {
    const json j{{"from", r.from}, {"to", r.to}, {"kind", r.kind},
                 {"bytes", r.bytes}};
    out << j.dump() << '\n';
  }
  write_text(path, out.str());
}

void save_outcome_json(const RunOutcome& outcome, int algorithm, int n_agents,
                       const std::string& path) {
  const json j{{"algorithm", algorithm},
               {"n_agents", n_agents},
               {"status", status_name(outcome.status)},
               {"certified", outcome.status == RunStatus::Certified},
               {"iterations", outcome.iterations},
               {"epsilon", outcome.epsilon},
               {"lambda_max_qbar", outcome.final_margin.lambda_max},
               {"message", outcome.message},
               {"total_seconds", outcome.total_seconds},
               {"avg_iter_ms", outcome.avg_iter_ms},
               {"max_projection_dim", outcome.max_projection_dim}};
  write_text(path, j.dump(2) + "\n");
}

std::vector<ReportRow> collect_report(const std::string& runs_dir) {
  namespace fs = std::filesystem;
  std::vector<ReportRow> rows;
  std::vector<fs::path> outcome_files;
  if (!fs::is_directory(runs_dir))
    throw std::runtime_error(runs_dir + " is not a directory");
  for (const auto& entry : fs::recursive_directory_iterator(runs_dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "outcome.json")
      outcome_files.push_back(entry.path());
  }
  std::sort(outcome_files.begin(), outcome_files.end());
  for (const auto& p : outcome_files) {
    const json j = read_json(p.string());
    ReportRow row;
    row.n_agents = j.value("n_agents", 0);
    row.algorithm = j.value("algorithm", 0);
    row.iterations = j.value("iterations", 0);
    row.avg_iter_ms = j.value("avg_iter_ms", 0.0);
    row.total_s = j.value("total_seconds", 0.0);
    row.status = j.value("status", std::string{"unknown"});
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.n_agents != b.n_agents) return a.n_agents < b.n_agents;
    return a.algorithm < b.algorithm;
  });
  return rows;
}

std::string render_report_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "n_uavs,algorithm,iterations,avg_iter_ms,total_s,status\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.n_agents << ',' << r.algorithm << ',' << r.iterations << ',';
    std::snprintf(buf, sizeof(buf), "%.3f", r.avg_iter_ms);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.3f", r.total_s);
    out << buf << ',' << r.status << '\n';
  }
  return out.str();
}

}  // namespace dissipnet
