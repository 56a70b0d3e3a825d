#include "doctest.h"
#include "support/instances.hpp"

#include "dissipnet/app.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <unistd.h>

using namespace dissipnet;
using namespace dissipnet::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dissipnet-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static int counter;
};
int TempDir::counter = 0;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("network files round-trip through disk") {
  TempDir tmp;
  for (const TestInstance& inst : all_instances()) {
    const std::string path = tmp.file(inst.name + ".json");
    save_network(inst.net, path);
    Network back = load_network(path);
    REQUIRE(back.agents.size() == inst.net.agents.size());
    for (size_t i = 0; i < back.agents.size(); ++i) {
      CHECK((back.agents[i].A - inst.net.agents[i].A).norm() == 0.0);
      CHECK((back.agents[i].B - inst.net.agents[i].B).norm() == 0.0);
      CHECK((back.agents[i].C - inst.net.agents[i].C).norm() == 0.0);
      CHECK((back.agents[i].D - inst.net.agents[i].D).norm() == 0.0);
      CHECK(back.agents[i].fixed_qsr.has_value() ==
            inst.net.agents[i].fixed_qsr.has_value());
      if (back.agents[i].fixed_qsr) {
        CHECK((back.agents[i].fixed_qsr->Q - inst.net.agents[i].fixed_qsr->Q)
                  .norm() == 0.0);
      }
    }
    CHECK(back.h.blocks.size() == inst.net.h.blocks.size());
    CHECK((back.h.dense() - inst.net.h.dense()).norm() == 0.0);
    CHECK(back.solver.max_iter == inst.net.solver.max_iter);
    CHECK(back.solver.rho == inst.net.solver.rho);
  }
}

TEST_CASE("malformed network files raise located errors") {
  TempDir tmp;
  SUBCASE("not JSON") {
    const std::string path = tmp.file("bad.json");
    std::ofstream(path) << "this is not json";
    CHECK_THROWS_AS(load_network(path), std::runtime_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_network(tmp.file("absent.json")),
                    std::runtime_error);
  }
  SUBCASE("agent index out of range") {
    Network net = skew_pair();
    const std::string path = tmp.file("oob.json");
    save_network(net, path);
    std::string text = slurp(path);
    // The coupling endpoints are stored 1-based; point one past the end.
    size_t pos = text.find("\"i\": 2");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 6, "\"i\": 9");
    std::ofstream(path, std::ios::binary) << text;
    CHECK_THROWS_AS(load_network(path), std::runtime_error);
  }
}

TEST_CASE("certificate files round-trip exactly") {
  TempDir tmp;
  Network net = skew_pair();
  RunOutcome out = run_alg1(net);
  REQUIRE(out.status == RunStatus::Certified);
  CertificateFile file;
  file.epsilon = out.epsilon;
  file.algorithm = 1;
  file.status = status_name(out.status);
  file.certificates = out.certificates;
  const std::string path = tmp.file("certs.json");
  save_certificates(file, path);
  CertificateFile back = load_certificates(path);
  CHECK(back.epsilon == file.epsilon);
  CHECK(back.algorithm == 1);
  CHECK(back.status == "certified");
  REQUIRE(back.certificates.size() == file.certificates.size());
  for (size_t i = 0; i < back.certificates.size(); ++i) {
    CHECK((back.certificates[i].P - file.certificates[i].P).norm() == 0.0);
    CHECK((back.certificates[i].Q - file.certificates[i].Q).norm() == 0.0);
    CHECK((back.certificates[i].S - file.certificates[i].S).norm() == 0.0);
    CHECK((back.certificates[i].R - file.certificates[i].R).norm() == 0.0);
  }
}

TEST_CASE("trace CSV bytes are a pure function of the rows") {
  std::vector<TraceRow> trace(3);
  for (int i = 0; i < 3; ++i) {
    trace[i].k = i + 1;
    trace[i].primal_res = 0.1 / (i + 1);
    trace[i].dual_res = 0.01 / (i + 1);
    trace[i].lambda_max_qbar = -0.5 + 1e-3 * i;
  }
  std::string a = render_trace_csv(trace);
  std::string b = render_trace_csv(trace);
  CHECK(a == b);
  CHECK(a.find("k,") == 0);
  CHECK(std::count(a.begin(), a.end(), '\n') == 4);  // header + 3 rows

  TempDir tmp;
  const std::string path = tmp.file("trace.csv");
  save_trace_csv(trace, path);
  CHECK(slurp(path) == a);
}

TEST_CASE("outcome JSON carries the run summary") {
  TempDir tmp;
  Network net = skew_pair();
  RunOutcome out = run_alg1(net);
  const std::string path = tmp.file("outcome.json");
  save_outcome_json(out, 1, 2, path);
  std::string text = slurp(path);
  CHECK(text.find("\"status\": \"certified\"") != std::string::npos);
  CHECK(text.find("\"algorithm\": 1") != std::string::npos);
  CHECK(text.find("\"n_agents\": 2") != std::string::npos);
  CHECK(text.find("\"iterations\"") != std::string::npos);
  CHECK(text.find("\"avg_iter_ms\"") != std::string::npos);
}

TEST_CASE("audit log is one JSON object per message") {
  TempDir tmp;
  MessageBus bus;
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = 1.0;
  bus.send("agent 1", "coordinator", Payload::certificate(m));
  bus.send("coordinator", "agent 1", Payload::clone_slice(m));
  const std::string path = tmp.file("audit.jsonl");
  save_audit_jsonl(bus.records(), path);
  std::string text = slurp(path);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.find("\"kind\":\"certificate\"") != std::string::npos);
  CHECK(text.find("\"kind\":\"clone-slice\"") != std::string::npos);
  CHECK(text.find("\"bytes\":8") != std::string::npos);
}

TEST_CASE("swarm example builds Hurwitz vehicles in the published topology") {
  UavParams params;
  params.subgroups = 4;
  Eigen::MatrixXd acl = uav_closed_loop(params);
  REQUIRE(acl.rows() == 6);
  Eigen::EigenSolver<Eigen::MatrixXd> es(acl);
  for (int i = 0; i < 6; ++i) CHECK(es.eigenvalues()(i).real() < 0.0);

  Network net = build_uav_network(params);
  REQUIRE(net.agents.size() == 12);
  for (const auto& ag : net.agents) {
    CHECK(ag.A.rows() == 6);
    CHECK(ag.B.cols() == 6);
    CHECK(ag.C.rows() == 6);
  }
  // Followers 2,3 of each subgroup read their leader; later subgroup leaders
  // also read vehicle 1. All blocks are the same gain matrix.
  std::set<std::pair<int, int>> pairs;
  for (const auto& [key, blk] : net.h.blocks) pairs.insert(key);
  std::set<std::pair<int, int>> expected;
  for (int s = 0; s < 4; ++s) {
    expected.insert({3 * s + 1, 3 * s});
    expected.insert({3 * s + 2, 3 * s});
    if (s > 0) expected.insert({3 * s, 0});
  }
  CHECK(pairs == expected);

  SUBCASE("size scales with the subgroup count") {
    params.subgroups = 2;
    CHECK(build_uav_network(params).agents.size() == 6);
  }
}

TEST_CASE("verification recomputes every certified property") {
  Network net = skew_pair();
  RunOutcome out = run_alg1(net);
  REQUIRE(out.status == RunStatus::Certified);

  VerifyReport ok = verify_certificate(net, out.certificates, out.epsilon);
  CHECK(ok.ok);
  CHECK(ok.problems.empty());
  CHECK(ok.qbar_lambda_max <= -out.epsilon / 2);

  SUBCASE("tampered certificate is rejected with the culprit named") {
    auto certs = out.certificates;
    // Pushing Q down tightens the tampered agent's own constraint past its
    // storage scalar's reach, so the report must name that agent.
    certs[1].Q(0, 0) -= 0.75;
    VerifyReport bad = verify_certificate(net, certs, out.epsilon);
    CHECK(!bad.ok);
    REQUIRE(!bad.problems.empty());
    bool names_agent2 = false;
    for (const auto& p : bad.problems)
      if (p.find("agent 2") != std::string::npos) names_agent2 = true;
    CHECK(names_agent2);
  }
  SUBCASE("inflated margin requirement is rejected") {
    VerifyReport bad = verify_certificate(net, out.certificates, 10.0);
    CHECK(!bad.ok);
  }
  SUBCASE("storage floor violations are caught") {
    auto certs = out.certificates;
    certs[0].P(0, 0) = -0.1;
    VerifyReport bad = verify_certificate(net, certs, out.epsilon);
    CHECK(!bad.ok);
    bool mentions_floor = false;
    for (const auto& p : bad.problems)
      if (p.find("positivity floor") != std::string::npos) mentions_floor = true;
    CHECK(mentions_floor);
  }
}

TEST_CASE("simulation stays bounded exactly when the coupling is benign") {
  Network stable = skew_pair();
  Eigen::VectorXd x0 = default_initial_state(stable, 7);
  CHECK(x0.size() == 2);
  CHECK((x0 - default_initial_state(stable, 7)).norm() == 0.0);  // same seed
  CHECK((x0 - default_initial_state(stable, 8)).norm() > 0.0);
  SimulationResult res = simulate_network(stable, x0, 20.0, 0.01);
  CHECK(res.bounded);
  CHECK(res.final_norm < x0.norm());

  Network blowup = make_network(lags(2), {{0, 1, 2.0}, {1, 0, 2.0}});
  SimulationResult bad =
      simulate_network(blowup, default_initial_state(blowup, 7), 20.0, 0.01);
  CHECK(!bad.bounded);
}

TEST_CASE("report collection scans run directories") {
  TempDir tmp;
  Network net = skew_pair();
  RunOutcome out = run_alg1(net);
  fs::create_directories(tmp.path / "run-a");
  fs::create_directories(tmp.path / "run-b");
  save_outcome_json(out, 1, 2, (tmp.path / "run-a" / "outcome.json").string());
  save_outcome_json(out, 2, 2, (tmp.path / "run-b" / "outcome.json").string());
  auto rows = collect_report(tmp.path.string());
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.n_agents == 2);
    CHECK(row.iterations == out.iterations);
    CHECK(row.status == "certified");
  }
  std::string csv = render_report_csv(rows);
  CHECK(csv.find("n_uavs") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
