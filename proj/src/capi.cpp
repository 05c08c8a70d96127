#include "smlab.h"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "smlab/config.hpp"
#include "smlab/dyadic.hpp"
#include "smlab/lattice.hpp"
#include "smlab/scenario.hpp"
#include "smlab/space.hpp"
#include "smlab/spectral.hpp"

using namespace smlab;

struct smlab_space {
  Space value;
};

struct smlab_dyadic {
  DyadicSystem value;
};

namespace {

thread_local std::string t_last_error;

smlab_status code_of(ErrCode c) {
  switch (c) {
    case ErrCode::invalid_argument:
      return SMLAB_ERR_INVALID_ARGUMENT;
    case ErrCode::parse:
      return SMLAB_ERR_PARSE;
    case ErrCode::io:
      return SMLAB_ERR_IO;
    case ErrCode::numeric:
      return SMLAB_ERR_NUMERIC;
    case ErrCode::task_failed:
      return SMLAB_ERR_TASK_FAILED;
  }
  return SMLAB_ERR_UNKNOWN;
}

template <typename Fn>
smlab_status guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return SMLAB_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return code_of(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return SMLAB_ERR_UNKNOWN;
  } catch (...) {
    t_last_error = "unknown error";
    return SMLAB_ERR_UNKNOWN;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require_arg(bool ok, const char* what) {
  if (!ok) fail(ErrCode::invalid_argument, std::string("null or invalid argument: ") + what);
}

}  // namespace

extern "C" {

const char* smlab_version(void) { return "1.0.0"; }

const char* smlab_last_error(void) { return t_last_error.c_str(); }

void smlab_string_free(char* s) { std::free(s); }

smlab_status smlab_space_model(const char* kind, int n, int dim, uint64_t seed,
                               smlab_space** out) {
  return guarded([&] {
    require_arg(kind != nullptr && out != nullptr, "kind/out");
    std::string k = kind;
    Space s = [&] {
      if (k == "cycle") return Space::cycle(n);
      if (k == "path") return Space::path(n);
      if (k == "torus") return Space::torus(n, dim);
      if (k == "cloud") return Space::random_cloud(n, dim, seed);
      fail(ErrCode::invalid_argument, "unknown space kind '" + k + "'");
    }();
    *out = new smlab_space{std::move(s)};
  });
}

smlab_status smlab_space_load(const char* path, smlab_space** out) {
  return guarded([&] {
    require_arg(path != nullptr && out != nullptr, "path/out");
    *out = new smlab_space{Space::load_file(path)};
  });
}

smlab_status smlab_space_from_config(const char* config_path, smlab_space** out) {
  return guarded([&] {
    require_arg(config_path != nullptr && out != nullptr, "config_path/out");
    Config cfg = Config::parse_file(config_path);
    require(cfg.has_section("space"), ErrCode::parse, "config needs a [space] section");
    *out = new smlab_space{space_from_section(cfg.section("space"))};
  });
}

smlab_status smlab_space_save(const smlab_space* space, const char* path) {
  return guarded([&] {
    require_arg(space != nullptr && path != nullptr, "space/path");
    space->value.save_file(path);
  });
}

void smlab_space_free(smlab_space* space) { delete space; }

int smlab_space_size(const smlab_space* space) {
  return space == nullptr ? 0 : space->value.size();
}

smlab_status smlab_space_ball(const smlab_space* space, int x, double r, int* out_indices,
                              int cap, int* out_count) {
  return guarded([&] {
    require_arg(space != nullptr && out_indices != nullptr && out_count != nullptr,
                "space/out");
    std::vector<int> b = space->value.ball(x, r);
    require(static_cast<int>(b.size()) <= cap, ErrCode::invalid_argument,
            "ball needs capacity " + std::to_string(b.size()));
    std::copy(b.begin(), b.end(), out_indices);
    *out_count = static_cast<int>(b.size());
  });
}

smlab_status smlab_space_volume(const smlab_space* space, int x, double r, double* out) {
  return guarded([&] {
    require_arg(space != nullptr && out != nullptr, "space/out");
    *out = space->value.volume(x, r);
  });
}

smlab_status smlab_space_doubling(const smlab_space* space, double* C_D, double* dim,
                                  double* C_d, double* C_cmp) {
  return guarded([&] {
    require_arg(space != nullptr, "space");
    DoublingProfile prof = space->value.doubling_profile();
    if (C_D != nullptr) *C_D = prof.C_D;
    if (dim != nullptr) *dim = prof.d;
    if (C_d != nullptr) *C_d = prof.C_d;
    if (C_cmp != nullptr) *C_cmp = prof.C_cmp;
  });
}

smlab_status smlab_space_check(const char* path, char** report_json) {
  return guarded([&] {
    require_arg(path != nullptr && report_json != nullptr, "path/report");
    Space s = Space::load_file(path);
    DoublingProfile prof = s.doubling_profile();
    nlohmann::json j;
    j["schema_version"] = 1;
    j["task"] = "space-check";
    j["points"] = s.size();
    j["diameter"] = s.diameter();
    j["total_mass"] = s.total_mass();
    j["fitted"] = {{"C_D", prof.C_D}, {"d", prof.d}, {"C_d", prof.C_d},
                   {"d_min16", prof.d_min16}, {"C_cmp", prof.C_cmp}};
    j["pass"] = true;  // loading already validated the metric
    *report_json = dup_string(j.dump(2) + "\n");
  });
}

smlab_status smlab_dyadic_build(const smlab_space* space, double delta, uint64_t seed,
                                smlab_dyadic** out) {
  return guarded([&] {
    require_arg(space != nullptr && out != nullptr, "space/out");
    *out = new smlab_dyadic{DyadicSystem::build(space->value, delta, seed)};
  });
}

smlab_status smlab_dyadic_save(const smlab_dyadic* sys, const smlab_space* space,
                               const char* path) {
  return guarded([&] {
    require_arg(sys != nullptr && space != nullptr && path != nullptr, "sys/space/path");
    std::ofstream os(path);
    require(os.good(), ErrCode::io, std::string("cannot open for writing: ") + path);
    sys->value.dump(os, space->value);
  });
}

smlab_status smlab_dyadic_load(const smlab_space* space, const char* path,
                               smlab_dyadic** out) {
  return guarded([&] {
    require_arg(space != nullptr && path != nullptr && out != nullptr, "space/path/out");
    std::ifstream is(path);
    require(is.good(), ErrCode::io, std::string("cannot open: ") + path);
    *out = new smlab_dyadic{DyadicSystem::parse(is, space->value)};
  });
}

smlab_status smlab_dyadic_verify(const smlab_dyadic* sys, const smlab_space* space,
                                 double c1_min, double C1_max, int* pass,
                                 char** report_json) {
  return guarded([&] {
    require_arg(sys != nullptr && space != nullptr && pass != nullptr, "sys/space/pass");
    DyadicVerifyReport rep = verify_dyadic(sys->value, space->value, c1_min, C1_max);
    *pass = rep.pass ? 1 : 0;
    if (report_json != nullptr) {
      nlohmann::json j;
      j["schema_version"] = 1;
      j["task"] = "dyadic-verify";
      j["fitted"] = {{"c1", rep.achieved_c1}, {"C1", rep.achieved_C1}};
      j["partition_ok"] = rep.partition_ok;
      j["nesting_ok"] = rep.nesting_ok;
      j["positive_measure_ok"] = rep.positive_measure_ok;
      j["pass"] = rep.pass;
      if (!rep.failures.empty()) j["failures"] = rep.failures;
      *report_json = dup_string(j.dump(2) + "\n");
    }
  });
}

void smlab_dyadic_free(smlab_dyadic* sys) { delete sys; }

smlab_status smlab_scenario_run(const char* config_path, const char* task_filter,
                                const char* out_dir, int threads,
                                const uint64_t* seed_override, int* all_pass,
                                char** summary_json) {
  return guarded([&] {
    require_arg(config_path != nullptr, "config_path");
    RunOptions opt;
    if (task_filter != nullptr) opt.task_filter = task_filter;
    if (out_dir != nullptr) opt.out_dir = out_dir;
    opt.threads = threads;
    if (seed_override != nullptr) {
      opt.seed_override = *seed_override;
      opt.has_seed_override = true;
    }
    ScenarioOutcome outcome = run_scenario_file(config_path, opt);
    write_outcome(outcome, opt.out_dir);
    if (all_pass != nullptr) *all_pass = outcome.all_pass ? 1 : 0;
    if (summary_json != nullptr) *summary_json = dup_string(outcome.summary_json);
  });
}

smlab_status smlab_spectral_apply(const char* config_path, const char* multiplier_spec,
                                  const char* field_csv_in, const char* field_csv_out) {
  return guarded([&] {
    require_arg(config_path != nullptr && multiplier_spec != nullptr &&
                    field_csv_in != nullptr && field_csv_out != nullptr,
                "config/multiplier/in/out");
    Config cfg = Config::parse_file(config_path);
    require(cfg.has_section("space") && cfg.has_section("operator"), ErrCode::parse,
            "spectral apply needs [space] and [operator] sections");
    Space s = space_from_section(cfg.section("space"));
    SpectralOperator A = operator_from_section(cfg.section("operator"), s);
    VectorField f = load_field_file(field_csv_in);
    require(static_cast<int>(f.rows()) == s.size(), ErrCode::invalid_argument,
            "field rows do not match the space");
    save_field_file(field_csv_out, A.apply(Multiplier::from_spec(multiplier_spec), f));
  });
}

smlab_status smlab_report_merge(const char* const* report_paths, int count,
                                char** csv_out) {
  return guarded([&] {
    require_arg(report_paths != nullptr && csv_out != nullptr && count >= 0,
                "paths/csv_out");
    std::vector<std::string> texts;
    for (int i = 0; i < count; ++i) {
      std::ifstream is(report_paths[i]);
      require(is.good(), ErrCode::io, std::string("cannot open: ") + report_paths[i]);
      std::ostringstream ss;
      ss << is.rdbuf();
      texts.push_back(ss.str());
    }
    *csv_out = dup_string(merge_reports(texts));
  });
}

}  // extern "C"
