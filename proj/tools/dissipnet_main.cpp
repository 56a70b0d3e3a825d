#include "CLI11.hpp"
#include "json.hpp"

#include "dissipnet/admm.hpp"
#include "dissipnet/app.hpp"
#include "dissipnet/chordal.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace dissipnet;

namespace {

int cmd_analyze(const std::string& net_path, int alg,
                const std::string& out_dir) {
  const Network net = load_network(net_path);
  MessageBus bus;
  const RunOutcome out =
      alg == 1 ? run_alg1(net, &bus) : run_alg2(net, &bus);
  if (out.status == RunStatus::Error) {
    std::cerr << "error: " << out.message << "\n";
    return 1;
  }
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  CertificateFile cf;
  cf.epsilon = out.epsilon;
  cf.algorithm = alg;
  cf.status = status_name(out.status);
  cf.certificates = out.certificates;
  save_certificates(cf, (dir / "certificate.json").string());
  save_trace_csv(out.trace, (dir / "trace.csv").string());
  save_outcome_json(out, alg, static_cast<int>(net.agents.size()),
                    (dir / "outcome.json").string());
  save_audit_jsonl(bus.records(), (dir / "audit.jsonl").string());
  const AuditReport audit = audit_messages(bus.records());

  std::cout << "status: " << status_name(out.status) << "\n"
            << "iterations: " << out.iterations << "\n"
            << "epsilon: " << out.epsilon << "\n"
            << "lambda_max(stability matrix): " << out.final_margin.lambda_max
            << "\n"
            << "privacy audit: " << (audit.pass ? "pass" : "FAIL") << " ("
            << audit.n_messages << " messages)\n"
            << "outputs: " << (dir / "certificate.json").string() << ", "
            << (dir / "trace.csv").string() << ", "
            << (dir / "outcome.json").string() << ", "
            << (dir / "audit.jsonl").string() << "\n";
  if (out.status != RunStatus::Certified) {
    std::cout << out.message << "\n";
    return 2;
  }
  return 0;
}

int cmd_decompose(const std::string& net_path) {
  const Network net = load_network(net_path);
  const CliqueDecomposition d = build_decomposition(NetworkShape::of(net));
  nlohmann::json j;
  j["M"] = d.num_cliques();
  j["L"] = d.overlap_edge_count();
  j["cliques"] = nlohmann::json::array();
  for (const auto& c : d.cliques) {
    nlohmann::json one = nlohmann::json::array();
    for (int v : c) one.push_back(v + 1);
    j["cliques"].push_back(std::move(one));
  }
  j["overlap_edges"] = nlohmann::json::array();
  for (const auto& pos : d.positions)
    if (!pos.diagonal())
      j["overlap_edges"].push_back(
          nlohmann::json::array({pos.i + 1, pos.j + 1}));
  j["fill_in_edges"] = nlohmann::json::array();
  for (const auto& [a, b] : d.fill)
    j["fill_in_edges"].push_back(nlohmann::json::array({a + 1, b + 1}));
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_verify(const std::string& net_path, const std::string& cert_path) {
  const Network net = load_network(net_path);
  const CertificateFile cf = load_certificates(cert_path);
  const double eps =
      cf.epsilon > 0 ? cf.epsilon : resolve_epsilon(net.solver, net.h);
  const VerifyReport rep = verify_certificate(net, cf.certificates, eps);
  if (rep.ok) {
    std::cout << "certificate verified: all agent constraints hold and "
                 "lambda_max(stability matrix)="
              << rep.qbar_lambda_max << " < " << -eps / 2 << "\n";
    return 0;
  }
  std::cout << "certificate rejected:\n";
  for (const auto& p : rep.problems) std::cout << "  - " << p << "\n";
  return 2;
}

int cmd_example_uav(int subgroups, const std::string& out_file) {
  UavParams params;
  params.subgroups = subgroups;
  const Network net = build_uav_network(params);
  save_network(net, out_file);
  std::cout << "wrote " << out_file << " (" << net.agents.size()
            << " vehicles, " << net.h.blocks.size() << " coupling blocks)\n";
  return 0;
}

int cmd_report(const std::string& runs_dir, const std::string& out_file) {
  const auto rows = collect_report(runs_dir);
  const std::string csv = render_report_csv(rows);
  if (out_file.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_file);
    out << csv;
    std::cout << "wrote " << out_file << " (" << rows.size() << " runs)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dissipnet: distributed stability certification for interconnected "
      "linear agents"};
  app.require_subcommand(1);

  std::string net_path, cert_path, out_dir, out_file, runs_dir;
  int alg = 1;
  int subgroups = 4;

  auto* analyze = app.add_subcommand(
      "analyze", "Run a consensus driver and write certificate, trace, "
                 "outcome, and audit files");
  analyze->add_option("--net", net_path, "network JSON file")->required();
  analyze->add_option("--alg", alg, "driver: 1 = centralized clone, 2 = clique split")
      ->check(CLI::IsMember({1, 2}));
  analyze->add_option("--out", out_dir, "output directory")->required();

  auto* decompose = app.add_subcommand(
      "decompose", "Print the clique decomposition of the stability pattern");
  decompose->add_option("--net", net_path, "network JSON file")->required();

  auto* verify = app.add_subcommand(
      "verify", "Re-check a certificate file against a network from scratch");
  verify->add_option("--net", net_path, "network JSON file")->required();
  verify->add_option("--cert", cert_path, "certificate JSON file")->required();

  auto* example = app.add_subcommand("example", "Write a built-in example network");
  auto* uav = example->add_subcommand(
      "uav", "Planar vehicle swarm in leader-follower subgroups of three");
  uav->add_option("--subgroups", subgroups, "number of subgroups (3 vehicles each)")
      ->check(CLI::PositiveNumber);
  uav->add_option("--out", out_file, "output network JSON file")->required();
  example->require_subcommand(1);

  auto* report = app.add_subcommand(
      "report", "Summarize a directory of analyze outputs as CSV");
  report->add_option("--runs", runs_dir, "directory containing run outputs")
      ->required();
  report->add_option("--out", out_file, "CSV output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze)) return cmd_analyze(net_path, alg, out_dir);
    if (app.got_subcommand(decompose)) return cmd_decompose(net_path);
    if (app.got_subcommand(verify)) return cmd_verify(net_path, cert_path);
    if (app.got_subcommand(example)) return cmd_example_uav(subgroups, out_file);
    if (app.got_subcommand(report)) return cmd_report(runs_dir, out_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
