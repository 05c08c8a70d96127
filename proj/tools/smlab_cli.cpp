// smlab command line: scenario-driven experiments over the C API.
#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <cstdio>
#include <string>
#include <vector>

#include "smlab.h"

namespace {

// 0 all pass, 1 task failure, 2 config/file problem, 4 internal error
int exit_code_of(smlab_status status) {
  switch (status) {
    case SMLAB_OK:
      return 0;
    case SMLAB_ERR_PARSE:
    case SMLAB_ERR_IO:
      return 2;
    case SMLAB_ERR_TASK_FAILED:
      return 1;
    default:
      return 4;
  }
}

int report(smlab_status status) {
  if (status != SMLAB_OK) std::fprintf(stderr, "error: %s\n", smlab_last_error());
  return exit_code_of(status);
}

void print_and_free(char* text) {
  if (text != nullptr) {
    std::fputs(text, stdout);
    smlab_string_free(text);
  }
}

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int threads = 0;
};

int run_filtered(const Common& common, const char* filter) {
  int all_pass = 0;
  char* summary = nullptr;
  smlab_status status = smlab_scenario_run(
      common.config.c_str(), filter, common.out.empty() ? nullptr : common.out.c_str(),
      common.threads, common.has_seed ? &common.seed : nullptr, &all_pass, &summary);
  if (status != SMLAB_OK) return report(status);
  print_and_free(summary);
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smlab: spaces of homogeneous type, dyadic systems, lattice maximal "
               "operators, spectral multipliers and kernel-estimate fitters"};
  app.require_subcommand(1);

  Common common;
  app.add_option("--config", common.config, "scenario configuration file")
      ->envname("SMLAB_CONFIG");
  app.add_option("--out", common.out, "output directory for reports and CSV files");
  auto* seed_opt = app.add_option("--seed", common.seed, "override the scenario seed");
  app.add_option("--threads", common.threads,
                 "worker threads (SMLAB_THREADS overrides this flag)");

  // space build|check
  auto* space = app.add_subcommand("space", "build or check metric measure spaces");
  space->require_subcommand(1);
  auto* space_build = space->add_subcommand("build", "build the [space] of a config");
  std::string space_out;
  space_build->add_option("--to", space_out, "space file to write")->required();
  auto* space_check = space->add_subcommand("check", "validate a space file");
  std::string space_in;
  space_check->add_option("--in", space_in, "space file to check")->required();

  // dyadic build|verify
  auto* dyadic = app.add_subcommand("dyadic", "build or verify dyadic systems");
  dyadic->require_subcommand(1);
  auto* dyadic_build = dyadic->add_subcommand("build", "build a system on the config space");
  std::string dyadic_out;
  double dyadic_delta = 0.5;
  std::uint64_t dyadic_seed = 1;
  dyadic_build->add_option("--to", dyadic_out, "dump file to write")->required();
  dyadic_build->add_option("--delta", dyadic_delta, "scale parameter in (0, 1/2]");
  dyadic_build->add_option("--net-seed", dyadic_seed, "net ordering seed");
  auto* dyadic_verify = dyadic->add_subcommand("verify", "verify a dumped system");
  std::string dyadic_in;
  double c1_min = 0.0, C1_max = 1e300;
  dyadic_verify->add_option("--in", dyadic_in, "dump file to verify")->required();
  dyadic_verify->add_option("--c1-min", c1_min, "required inner constant");
  dyadic_verify->add_option("--C1-max", C1_max, "allowed outer constant");

  // maximal sweep
  auto* maximal = app.add_subcommand("maximal", "maximal operator probes");
  maximal->require_subcommand(1);
  maximal->add_subcommand("sweep", "dimension sweep of the M_HL ratio (CSV)");

  // spectral hnorm|apply|pl
  auto* spectral = app.add_subcommand("spectral", "multiplier norms and calculus");
  spectral->require_subcommand(1);
  spectral->add_subcommand("hnorm", "Hoermander norms from the config tasks");
  auto* spectral_apply = spectral->add_subcommand("apply", "apply f(A) to a field CSV");
  std::string mult_spec, field_in, field_out;
  spectral_apply->add_option("--multiplier", mult_spec, "e.g. heat:1, bochner-riesz:2:1")
      ->required();
  spectral_apply->add_option("--in", field_in, "input field CSV")->required();
  spectral_apply->add_option("--to", field_out, "output field CSV")->required();
  spectral->add_subcommand("pl", "Paley-Littlewood ratios from the config tasks");

  // estimates ge|gge|complex|dispersive|rbound|square|cz
  auto* estimates = app.add_subcommand("estimates", "kernel-estimate fitters");
  estimates->require_subcommand(1);
  estimates->add_subcommand("ge", "Gaussian estimate fit");
  estimates->add_subcommand("gge", "generalised Gaussian estimate check");
  estimates->add_subcommand("complex", "complex-time profile");
  estimates->add_subcommand("dispersive", "dispersive decay fit");
  estimates->add_subcommand("rbound", "semigroup R-bound profile");
  estimates->add_subcommand("square", "multiplier square-function test");
  estimates->add_subcommand("cz", "Calderon-Zygmund decomposition batch");

  auto* verify = app.add_subcommand("verify", "run every task in the scenario");
  auto* run = app.add_subcommand("run", "run every task in the scenario");

  // report merge
  auto* report_cmd = app.add_subcommand("report", "combine task reports");
  report_cmd->require_subcommand(1);
  auto* merge = report_cmd->add_subcommand("merge", "merge report JSON files into CSV");
  std::vector<std::string> merge_inputs;
  std::string merge_out;
  merge->add_option("files", merge_inputs, "report JSON files")->required();
  merge->add_option("--to", merge_out, "CSV file to write (stdout otherwise)");

  // allow the global flags to appear after any subcommand
  std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* cmd) {
    for (CLI::App* sub : cmd->get_subcommands({})) {
      sub->fallthrough();
      enable_fallthrough(sub);
    }
  };
  enable_fallthrough(&app);

  CLI11_PARSE(app, argc, argv);
  common.has_seed = seed_opt->count() > 0;

  auto need_config = [&]() -> bool {
    if (common.config.empty()) {
      std::fprintf(stderr, "error: --config is required for this subcommand\n");
      return false;
    }
    return true;
  };

  if (space_build->parsed()) {
    if (!need_config()) return 2;
    smlab_space* s = nullptr;
    smlab_status st = smlab_space_from_config(common.config.c_str(), &s);
    if (st == SMLAB_OK) st = smlab_space_save(s, space_out.c_str());
    smlab_space_free(s);
    return report(st);
  }
  if (space_check->parsed()) {
    char* json = nullptr;
    smlab_status st = smlab_space_check(space_in.c_str(), &json);
    if (st != SMLAB_OK) return report(st);
    print_and_free(json);
    return 0;
  }
  if (dyadic_build->parsed()) {
    if (!need_config()) return 2;
    smlab_space* s = nullptr;
    smlab_dyadic* d = nullptr;
    smlab_status st = smlab_space_from_config(common.config.c_str(), &s);
    if (st == SMLAB_OK)
      st = smlab_dyadic_build(s, dyadic_delta, common.has_seed ? common.seed : dyadic_seed,
                              &d);
    if (st == SMLAB_OK) st = smlab_dyadic_save(d, s, dyadic_out.c_str());
    smlab_dyadic_free(d);
    smlab_space_free(s);
    return report(st);
  }
  if (dyadic_verify->parsed()) {
    if (!need_config()) return 2;
    smlab_space* s = nullptr;
    smlab_dyadic* d = nullptr;
    int pass = 0;
    char* json = nullptr;
    smlab_status st = smlab_space_from_config(common.config.c_str(), &s);
    if (st == SMLAB_OK) st = smlab_dyadic_load(s, dyadic_in.c_str(), &d);
    if (st == SMLAB_OK) st = smlab_dyadic_verify(d, s, c1_min, C1_max, &pass, &json);
    smlab_dyadic_free(d);
    smlab_space_free(s);
    if (st != SMLAB_OK) return report(st);
    print_and_free(json);
    return pass ? 0 : 1;
  }
  if (spectral_apply->parsed()) {
    if (!need_config()) return 2;
    return report(smlab_spectral_apply(common.config.c_str(), mult_spec.c_str(),
                                       field_in.c_str(), field_out.c_str()));
  }
  if (merge->parsed()) {
    std::vector<const char*> paths;
    paths.reserve(merge_inputs.size());
    for (const auto& p : merge_inputs) paths.push_back(p.c_str());
    char* csv = nullptr;
    smlab_status st =
        smlab_report_merge(paths.data(), static_cast<int>(paths.size()), &csv);
    if (st != SMLAB_OK) return report(st);
    // exit 1 when any merged row failed (third column is the pass flag)
    int all_pass = 1;
    {
      std::string text = csv;
      std::size_t pos = text.find('\n');  // skip the header
      while (pos != std::string::npos && pos + 1 < text.size()) {
        std::size_t next = text.find('\n', pos + 1);
        std::string line = text.substr(pos + 1, next == std::string::npos
                                                    ? std::string::npos
                                                    : next - pos - 1);
        std::size_t c1 = line.find(", ");
        std::size_t c2 = c1 == std::string::npos ? c1 : line.find(", ", c1 + 2);
        if (c2 != std::string::npos && line.compare(c2 + 2, 1, "0") == 0) all_pass = 0;
        pos = next;
      }
    }
    if (merge_out.empty()) {
      std::fputs(csv, stdout);
    } else {
      std::FILE* f = std::fopen(merge_out.c_str(), "wb");
      if (f == nullptr) {
        std::fprintf(stderr, "error: cannot write %s\n", merge_out.c_str());
        smlab_string_free(csv);
        return 2;
      }
      std::fputs(csv, f);
      std::fclose(f);
    }
    smlab_string_free(csv);
    return all_pass ? 0 : 1;
  }

  // the remaining subcommands are scenario-task filters
  if (!need_config()) return 2;
  if (verify->parsed() || run->parsed()) return run_filtered(common, nullptr);
  if (maximal->parsed()) return run_filtered(common, "maximal-sweep");
  if (spectral->parsed()) {
    if (spectral->get_subcommand("hnorm")->parsed())
      return run_filtered(common, "hormander-norm");
    return run_filtered(common, "paley-littlewood");
  }
  if (estimates->parsed()) {
    if (estimates->get_subcommand("ge")->parsed()) return run_filtered(common, "ge-fit");
    if (estimates->get_subcommand("gge")->parsed()) return run_filtered(common, "gge-check");
    if (estimates->get_subcommand("complex")->parsed())
      return run_filtered(common, "complex-profile");
    if (estimates->get_subcommand("dispersive")->parsed())
      return run_filtered(common, "dispersive");
    if (estimates->get_subcommand("rbound")->parsed())
      return run_filtered(common, "rbound-profile");
    if (estimates->get_subcommand("square")->parsed())
      return run_filtered(common, "square-test");
    return run_filtered(common, "cz");
  }
  return 0;
}
