#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rpltrail/chains.hpp"
#include "rpltrail/scenario.hpp"

using namespace rpltrail;

namespace {

int fail(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 2;
}

bool write_out(const std::string& path, const std::string& body,
               std::string& err) {
  std::ofstream f(path);
  if (!f) {
    err = "cannot open " + path;
    return false;
  }
  f << body;
  return true;
}

int cmd_simulate(const std::string& config_path, const std::string& log_path,
                 const std::string& report_path) {
  std::ifstream f(config_path);
  if (!f) return fail("cannot open " + config_path);
  Json spec = Json::parse(f, nullptr, false);
  if (spec.is_discarded()) return fail("config is not valid json");
  std::string err;
  auto sc = parse_scenario(spec, err);
  if (!sc) return fail(err);
  if (const char* s = std::getenv("SEED")) {
    try {
      sc->seed = std::stoull(s);
    } catch (...) {
      return fail("SEED env var is not a number");
    }
  }
  RunReport rep = run_scenario(*sc);
  Json out = rep.to_json();
  out["config"] = sc->to_json();
  std::cout << out.dump(2) << "\n";
  if (!report_path.empty() && !write_out(report_path, out.dump(2) + "\n", err))
    return fail(err);
  if (!log_path.empty()) {
    std::string body;
    for (const auto& r : rep.log) body += r.to_json().dump() + "\n";
    if (!write_out(log_path, body, err)) return fail(err);
  }
  if (!sc->expect.empty() && rep.outcome != sc->expect) {
    std::cerr << "expected outcome '" << sc->expect << "', got '"
              << rep.outcome << "'\n";
    return 3;
  }
  return 0;
}

int cmd_json_report(Json j, const std::string& out_path, bool gate_matches) {
  std::cout << j.dump(2) << "\n";
  std::string err;
  if (!out_path.empty() && !write_out(out_path, j.dump(2) + "\n", err))
    return fail(err);
  if (gate_matches)
    for (const auto& cell : j["cells"])
      if (!cell["match"].get<bool>()) return 3;
  return 0;
}

int cmd_selftest() {
  for (const char* name : {"test", "production"}) {
    PrimitiveSuite s = std::string(name) == "production"
                           ? make_production_suite()
                           : make_test_suite();
    std::mt19937_64 rng(7);
    ChainSet c = ChainSet::build(s, rng, 4, 8);
    for (uint32_t i = 1; i <= c.n; ++i) {
      if (hash_forward(s, c.version_chain[i], 1) != c.version_chain[i - 1]) {
        std::cout << "version chain broken at " << name << "/" << i << "\n";
        return 2;
      }
      if (c.rank_element(s, i, c.l) != c.rank_tails[i - 1]) {
        std::cout << "rank tail mismatch at " << name << "/" << i << "\n";
        return 2;
      }
    }
    for (size_t i = 0; i + 1 < c.enc_chain.size(); ++i) {
      if (s.dec(c.enc_chain[i + 1], c.enc_chain[i]) != c.rank_tails[i]) {
        std::cout << "encryption chain broken at " << name << "/" << i << "\n";
        return 2;
      }
    }
    std::cout << name << " suite: chains ok\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic topology-authentication simulator"};
  app.require_subcommand(1);

  std::string config_path, log_path, report_path, out_path;

  auto* sim = app.add_subcommand("simulate", "run one scenario config");
  sim->add_option("--config", config_path, "scenario json file")->required();
  sim->add_option("--log", log_path, "write the event log as jsonl");
  sim->add_option("--report", report_path, "write the report json");

  auto* table = app.add_subcommand(
      "table", "collection-round payload sizes over full k-ary trees");
  table->add_option("--out", out_path, "write the table json");

  auto* matrix =
      app.add_subcommand("attack-matrix", "run the canonical attack grid");
  matrix->add_option("--out", out_path, "write the matrix json");

  app.add_subcommand("selftest", "verify chain material end to end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, log_path, report_path);
    if (table->parsed()) return cmd_json_report(overhead_table(), out_path, false);
    if (matrix->parsed()) return cmd_json_report(attack_matrix(), out_path, true);
    return cmd_selftest();
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}
