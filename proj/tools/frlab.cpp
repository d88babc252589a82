#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "freerider/audit.hpp"
#include "freerider/experiment.hpp"
#include "freerider/io.hpp"
#include "freerider/plot.hpp"
#include "freerider/policy.hpp"

namespace fs = std::filesystem;
using freerider::SuiteCheck;
using freerider::SuiteResult;

namespace {

fs::path default_out_root() {
  const char* env = std::getenv("FRLAB_OUT");
  return env != nullptr && env[0] != '\0' ? fs::path(env) : fs::path("out");
}

void print_manifest(const freerider::RunManifest& manifest, const fs::path& dir) {
  std::printf("%s (%s): %s in %.2f s -> %s\n", manifest.name.c_str(), manifest.kind.c_str(),
              manifest.status.c_str(), manifest.duration_seconds, dir.string().c_str());
  for (const auto& outcome : manifest.seeds) {
    if (!outcome.ok) {
      std::printf("  seed %llu failed: %s\n", static_cast<unsigned long long>(outcome.seed),
                  outcome.error.c_str());
    }
  }
}

int print_suite(const SuiteResult& result) {
  for (const SuiteCheck& check : result.checks) {
    std::printf("[%s] %s: %s%s%s\n", check.passed ? "PASS" : "FAIL", result.name.c_str(),
                check.name.c_str(), check.detail.empty() ? "" : " -- ", check.detail.c_str());
  }
  return result.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matrix-game and commons experiment runner"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_override;
  int jobs = 0;
  auto* run = app.add_subcommand("run", "run an experiment spec (json)");
  run->add_option("spec", spec_path, "path to the spec file")->required();
  run->add_option("-o,--out", out_override, "output directory (default: $FRLAB_OUT/<name>)");
  run->add_option("-j,--jobs", jobs, "worker threads for seeds (0 = auto)");

  std::vector<std::string> csv_paths;
  std::string svg_path = "curves.svg";
  auto* plot = app.add_subcommand("plot", "render learning-curve csv files to svg");
  plot->add_option("csv", csv_paths, "learning-curve csv files")->required();
  plot->add_option("-o,--out", svg_path, "output svg path");

  std::string suite_name = "all";
  std::string replicate_out;
  int replicate_jobs = 0;
  auto* replicate = app.add_subcommand("replicate", "run a pinned-seed result suite");
  replicate->add_option("suite", suite_name, "suite name or 'all'");
  replicate->add_option("-o,--out", replicate_out, "output root (default: $FRLAB_OUT)");
  replicate->add_option("-j,--jobs", replicate_jobs, "worker threads (0 = auto)");

  std::string p1_name;
  std::string p2_name;
  double gamma = 0.96;
  double epsilon = 1e-6;
  std::string audit_json_path;
  auto* audit = app.add_subcommand("audit", "exact unilateral-deviation audit of a strategy pair");
  audit->add_option("--p1", p1_name, "player 1 strategy")->required();
  audit->add_option("--p2", p2_name, "player 2 strategy")->required();
  audit->add_option("--gamma", gamma, "discount factor");
  audit->add_option("--epsilon", epsilon, "Nash tolerance");
  audit->add_option("--json", audit_json_path, "also write the report as json");

  int steps = 0;
  std::string induction_json_path;
  auto* induction =
      app.add_subcommand("backward-induction", "solve the fixed-horizon repeated game");
  induction->add_option("--steps", steps, "number of rounds")->required();
  induction->add_option("--json", induction_json_path, "also write the certificate as json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const nlohmann::json spec = nlohmann::json::parse(freerider::read_file(spec_path));
      const std::string name = spec.contains("name") && spec.at("name").is_string()
                                   ? spec.at("name").get<std::string>()
                                   : "experiment";
      const fs::path dir =
          out_override.empty() ? default_out_root() / name : fs::path(out_override);
      const freerider::RunManifest manifest = freerider::run_experiment(spec, dir, jobs);
      print_manifest(manifest, dir);
      return manifest.all_ok() ? 0 : 1;
    }
    if (*plot) {
      std::vector<freerider::PlotPanel> panels;
      for (const std::string& path : csv_paths) {
        freerider::PlotPanel panel;
        panel.title = fs::path(path).stem().string();
        panel.table = freerider::parse_csv(freerider::read_file(path));
        panels.push_back(std::move(panel));
      }
      freerider::atomic_write_file(svg_path, freerider::render_learning_curves_svg(panels));
      std::printf("wrote %s\n", svg_path.c_str());
      return 0;
    }
    if (*replicate) {
      const fs::path root =
          replicate_out.empty() ? default_out_root() : fs::path(replicate_out);
      std::vector<std::string> suites;
      if (suite_name == "all") {
        suites = freerider::replicate_suite_names();
      } else {
        suites.push_back(suite_name);
      }
      int exit_code = 0;
      for (const std::string& suite : suites) {
        const SuiteResult result =
            freerider::run_replicate_suite(suite, root / suite, replicate_jobs);
        if (print_suite(result) != 0) exit_code = 1;
      }
      return exit_code;
    }
    if (*audit) {
      const auto policy1 = freerider::fixed_strategy(freerider::strategy_from_string(p1_name), 1);
      const auto policy2 = freerider::fixed_strategy(freerider::strategy_from_string(p2_name), 2);
      const freerider::AuditReport report = freerider::exploitability(
          freerider::MatrixGame::default_pd(), policy1, policy2, gamma, epsilon);
      std::printf("%s", freerider::audit_text_summary(report).c_str());
      if (!audit_json_path.empty()) {
        nlohmann::json artifact = freerider::to_json(report);
        artifact["p1"] = p1_name;
        artifact["p2"] = p2_name;
        freerider::atomic_write_file(audit_json_path, artifact.dump(2) + "\n");
      }
      return 0;
    }
    if (*induction) {
      const freerider::InductionCertificate certificate =
          freerider::backward_induction_fixed_horizon(freerider::MatrixGame::default_pd(), steps);
      std::printf("backward induction over %d rounds: %s, min deviation margin %s\n",
                  certificate.steps, certificate.all_defect ? "defect every round" : "inconclusive",
                  freerider::format_double(certificate.min_margin()).c_str());
      if (!induction_json_path.empty()) {
        freerider::atomic_write_file(induction_json_path,
                                     freerider::to_json(certificate).dump(2) + "\n");
      }
      return 0;
    }
  } catch (const freerider::SpecError& e) {
    std::fprintf(stderr, "spec error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
