#include "smlab/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "smlab/dyadic.hpp"
#include "smlab/estimates.hpp"
#include "smlab/lattice.hpp"
#include "smlab/maximal.hpp"
#include "smlab/parallel.hpp"
#include "smlab/rng.hpp"
#include "smlab/space.hpp"
#include "smlab/spectral.hpp"

namespace smlab {

namespace {

using json = nlohmann::json;
constexpr int kSchemaVersion = 1;

std::vector<double> log_grid(double lo, double hi, int count) {
  require(lo > 0.0 && hi >= lo && count >= 1, ErrCode::parse, "bad log grid bounds");
  std::vector<double> g;
  for (int i = 0; i < count; ++i)
    g.push_back(lo * std::pow(hi / lo, count == 1 ? 0.0 : double(i) / (count - 1)));
  return g;
}

std::vector<double> grid_from(const ConfigSection& sec, const std::string& prefix,
                              double def_lo, double def_hi, int def_count) {
  if (sec.has(prefix + "_grid")) return sec.get_list(prefix + "_grid");
  return log_grid(sec.get_double(prefix + "_min", def_lo),
                  sec.get_double(prefix + "_max", def_hi),
                  sec.get_int(prefix + "_count", def_count));
}

Mat load_matrix_file(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), ErrCode::io, "cannot open matrix file: " + path);
  std::vector<double> nums;
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double v;
    while (ls >> v) nums.push_back(v);
  }
  require(!nums.empty(), ErrCode::parse, "matrix file is empty: " + path);
  int n = static_cast<int>(nums[0]);
  require(n >= 1 && static_cast<std::size_t>(n) * n + 1 == nums.size(), ErrCode::parse,
          "matrix file must hold n followed by n*n entries: " + path);
  Mat M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = nums[1 + i * n + j];
  return M;
}

VectorField random_field(const Space& s, int m, std::uint64_t seed) {
  Rng rng(seed);
  VectorField f(s.size(), m);
  for (int x = 0; x < s.size(); ++x)
    for (int w = 0; w < m; ++w) f(x, w) = rng.cgaussian();
  return f;
}


/// Shared scenario state; the space/operator/doubling profile are built once.
struct Context {
  const Config& cfg;
  RunOptions opt;
  std::string name;
  std::uint64_t seed;
  std::string operator_desc = "none";

  std::optional<Space> space;
  std::optional<SpectralOperator> op;
  std::optional<DoublingProfile> profile;
  std::optional<GaussianFit> last_ge;

  explicit Context(const Config& c, const RunOptions& o) : cfg(c), opt(o) {
    name = cfg.top_string("name", "scenario");
    seed = opt.has_seed_override ? opt.seed_override : cfg.top_seed("seed", 1);
  }

  const Space& get_space() {
    if (!space) {
      require(cfg.has_section("space"), ErrCode::parse, "config needs a [space] section");
      space = space_from_section(cfg.section("space"));
    }
    return *space;
  }

  const SpectralOperator& get_op() {
    if (!op) {
      require(cfg.has_section("operator"), ErrCode::parse,
              "config needs an [operator] section");
      const ConfigSection& sec = cfg.section("operator");
      op = operator_from_section(sec, get_space());
      operator_desc = sec.get_string("kind", "laplacian");
    }
    return *op;
  }

  const DoublingProfile& get_profile() {
    if (!profile) profile = get_space().doubling_profile();
    return *profile;
  }

  double lebesgue_p() const {
    return cfg.has_section("lattice") ? cfg.section("lattice").get_double("p", 2.0) : 2.0;
  }

  LatticeSpec lattice() const {
    if (!cfg.has_section("lattice")) return LatticeSpec::seq(2.0, 1);
    const ConfigSection& sec = cfg.section("lattice");
    std::string kind = sec.get_string("kind", "seq");
    double s = sec.get_double("s", 2.0);
    int m = sec.get_int("m", 1);
    LatticeSpec base = kind == "mixed" ? LatticeSpec::mixed(s, m, sec.get_int("m_inner", 2))
                                       : LatticeSpec::seq(s, m);
    if (sec.has("convexify")) return LatticeSpec::convexify(base, sec.get_double("convexify"));
    return base;
  }

  double convexity_pY() const {
    if (!cfg.has_section("lattice")) return 2.0;
    const ConfigSection& sec = cfg.section("lattice");
    double s = sec.get_double("s", 2.0);
    return sec.get_double("pY", std::min(s, 2.0));
  }

  double concavity_qY() const {
    if (!cfg.has_section("lattice")) return 2.0;
    const ConfigSection& sec = cfg.section("lattice");
    double s = sec.get_double("s", 2.0);
    return sec.get_double("qY", std::max(s, 2.0));
  }

  HormanderParams spectral_params(double beta) {
    const SpectralOperator& A = get_op();
    double lo = A.lambda_max() > 0 ? A.lambda_min_positive() : 1.0;
    double hi = A.lambda_max() > 0 ? A.lambda_max() : 1.0;
    return HormanderParams::for_range(beta, lo, hi);
  }
};

json base_report(const Context& ctx, const std::string& type, std::uint64_t seed) {
  json rep;
  rep["schema_version"] = kSchemaVersion;
  rep["scenario"] = ctx.name;
  rep["task"] = type;
  rep["operator"] = ctx.operator_desc;
  rep["seed"] = seed;
  rep["params"] = json::object();
  rep["fitted"] = json::object();
  rep["residual"] = 0.0;
  return rep;
}

std::string csv_of_columns(const std::vector<std::string>& header,
                           const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? ", " : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? ", " : "") << row[i];
    os << "\n";
  }
  return os.str();
}

// ---- task implementations -------------------------------------------------

TaskOutcome task_dyadic_verify(Context& ctx, const ConfigSection& sec, int index,
                               std::uint64_t seed) {
  const Space& s = ctx.get_space();
  double delta = sec.get_double("delta", 0.5);
  DyadicSystem sys = sec.has("dump")
                         ? [&] {
                             std::ifstream is(sec.raw("dump"));
                             require(is.good(), ErrCode::io,
                                     "cannot open dump: " + sec.raw("dump"));
                             return DyadicSystem::parse(is, s);
                           }()
                         : DyadicSystem::build(s, delta, seed);
  double c1_min = sec.get_double("c1_min", 0.0);
  double C1_max = sec.get_double("C1_max", std::numeric_limits<double>::infinity());
  DyadicVerifyReport rep = verify_dyadic(sys, s, c1_min, C1_max);

  TaskOutcome out;
  out.type = "dyadic-verify";
  out.index = index;
  out.pass = rep.pass && rep.achieved_c1 > 0.0;
  json j = base_report(ctx, out.type, seed);
  j["params"] = {{"delta", delta}, {"c1_min", c1_min}, {"C1_max", C1_max}};
  j["fitted"] = {{"c1", rep.achieved_c1},
                 {"C1", rep.achieved_C1},
                 {"levels", sys.level_count()},
                 {"partition_ok", rep.partition_ok},
                 {"nesting_ok", rep.nesting_ok},
                 {"positive_measure_ok", rep.positive_measure_ok}};
  j["pass"] = out.pass;
  if (!rep.failures.empty()) j["failures"] = rep.failures;
  out.report_json = j.dump(2) + "\n";
  return out;
}

TaskOutcome task_maximal_sweep(Context& ctx, const ConfigSection& sec, int index,
                               std::uint64_t seed) {
  const Space& s = ctx.get_space();
  double p = sec.get_double("p", ctx.lebesgue_p());
  double lat_s = sec.get_double("s", 2.0);
  std::vector<double> m_list = sec.get_list("m_list");
  int trials = sec.get_int("trials", 20);
  double ceiling = sec.get_double("ceiling", 4.0);

  std::vector<std::vector<double>> rows;
  double first_ratio = 0.0;
  double max_ratio = 0.0;
  VectorField carry;  // argmax of the previous dimension, embedded upward
  bool have_carry = false;
  for (std::size_t mi = 0; mi < m_list.size(); ++mi) {
    int m = static_cast<int>(m_list[mi]);
    require(m >= 1, ErrCode::parse, "maximal-sweep: dimensions must be >= 1");
    LatticeSpec Y = LatticeSpec::seq(lat_s, m);
    std::vector<VectorField> extras;
    if (have_carry) {
      VectorField lifted = VectorField::Zero(s.size(), m);
      lifted.leftCols(std::min<int>(m, static_cast<int>(carry.cols()))) =
          carry.leftCols(std::min<int>(m, static_cast<int>(carry.cols())));
      extras.push_back(lifted);
    }
    VectorField argmax;
    MaximalReport rep = norm_probe(
        "m_hl", [](const Space& sp, const VectorField& f) { return m_hl(sp, f); }, p, Y, s,
        trials, Rng::derive(seed, mi), extras, &argmax);
    carry = argmax;
    have_carry = argmax.size() > 0;
    if (mi == 0) first_ratio = rep.ratio;
    max_ratio = std::max(max_ratio, rep.ratio);
    rows.push_back({double(m), p, lat_s, rep.ratio});
  }

  TaskOutcome out;
  out.type = "maximal-sweep";
  out.index = index;
  out.pass = first_ratio > 0.0 && max_ratio <= ceiling * first_ratio;
  json j = base_report(ctx, out.type, seed);
  j["params"] = {{"p", p}, {"s", lat_s}, {"m_list", m_list}, {"trials", trials},
                 {"ceiling", ceiling}};
  j["fitted"] = {{"ratio_first", first_ratio}, {"ratio_max", max_ratio}};
  j["pass"] = out.pass;
  out.report_json = j.dump(2) + "\n";
  out.csv_files.emplace_back("sweep", csv_of_columns({"m", "p", "s", "ratio"}, rows));
  return out;
}

TaskOutcome task_hormander_norm(Context& ctx, const ConfigSection& sec, int index,
                                std::uint64_t seed) {
  Multiplier f = Multiplier::from_spec(sec.raw("multiplier"));
  double beta = sec.get_double("beta", 1.0);
  HormanderParams params;
  if (sec.has("r_min") || sec.has("r_max")) {
    params.beta = beta;
    params.r_min = sec.get_double("r_min", 1.0 / 256.0);
    params.r_max = sec.get_double("r_max", 256.0);
  } else if (ctx.cfg.has_section("operator")) {
    params = ctx.spectral_params(beta);
  } else {
    params.beta = beta;
  }
  params.per_octave = sec.get_int("per_octave", params.per_octave);
  params.samples = sec.get_int("samples", params.samples);
  params.padding = sec.get_int("padding", params.padding);
  HormanderNorm norm = hormander_norm(f, params);

  TaskOutcome out;
  out.type = "hormander-norm";
  out.index = index;
  out.pass = std::isfinite(norm.value);
  json j = base_report(ctx, out.type, seed);
  j["params"] = {{"multiplier", f.name()}, {"beta", beta}, {"r_min", params.r_min},
                 {"r_max", params.r_max}, {"per_octave", params.per_octave},
                 {"samples", params.samples}, {"padding", params.padding}};
  j["fitted"] = {{"value", norm.value}, {"f0", norm.f0}, {"sup_term", norm.sup_term},
                 {"argmax_R", norm.argmax_R}, {"undersampled", norm.undersampled}};
  j["pass"] = out.pass;
  out.report_json = j.dump(2) + "\n";
  return out;
}

TaskOutcome task_ge_fit(Context& ctx, const ConfigSection& sec, int index,
                        std::uint64_t seed) {
  const SpectralOperator& A = ctx.get_op();
  double m = sec.get_double("m", 2.0);
  std::vector<double> ts = grid_from(sec, "t", 0.1, 10.0, 17);
  std::vector<double> cs = grid_from(sec, "c", 1.0 / 64.0, 4.0, 33);
  double cap = sec.get_double("C_cap", std::numeric_limits<double>::infinity());
  GaussianFit fit = fit_gaussian(A, m, ts, cs, cap);
  ctx.last_ge = fit;

  TaskOutcome out;
  out.type = "ge-fit";
  out.index = index;
  out.pass = fit.pass;
  json j = base_report(ctx, out.type, seed);
  j["params"] = {{"m", m}, {"t_grid", ts}, {"c_count", cs.size()}, {"C_cap", cap}};
  j["fitted"] = {{"C", fit.C}, {"c", fit.c}};
  json pairs = json::array();
  for (const auto& [c, C] : fit.feasible) pairs.push_back({{"c", c}, {"C", C}});
  j["feasible"] = pairs;
  j["residual"] = fit.max_residual;
  j["pass"] = fit.pass;
  out.report_json = j.dump(2) + "\n";
  return out;
}

TaskOutcome task_gge_check(Context& ctx, const ConfigSection& sec, int index,
                           std::uint64_t seed) {
  const SpectralOperator& A = ctx.get_op();
  double p0 = sec.get_double("p0", 1.0);
  double m = sec.get_double("m", 2.0);
  std::vector<double> ts = grid_from(sec, "t", 0.1, 10.0, 17);
  std::vector<double> cs = grid_from(sec, "c", 1.0 / 64.0, 4.0, 33);
  double cap = sec.get_double("C_cap", std::numeric_limits<double>::infinity());
  GgeResult res = check_gge(A, p0, m, ts, cs, cap);

  TaskOutcome out;
  out.type = "gge-check";
  out.index = index;
  out.pass = res.pass;
  json j = base_report(ctx, out.type, seed);
  j["params"] = {{"p0", p0}, {"m", m}, {"t_grid", ts}, {"C_cap", cap}};
  j["fitted"] = {{"C", res.C}, {"c", res.c}, {"mode", res.mode},
                 {"lower_vs_upper", res.lower_vs_upper}};
  j["residual"] = res.max_residual;
  j["pass"] = res.pass;
  out.report_json = j.dump(2) + "\n";
  return out;
}

TaskOutcome task_complex_profile(Context& ctx, const ConfigSection& sec, int index,
                                 std::uint64_t seed) {
  TaskOutcome out;
  out.type = "complex-profile";
  out.index = index;
  json j = base_report(ctx, out.type, seed);
  if (!ctx.last_ge || !ctx.last_ge->pass) {
    out.pass = false;
    j["pass"] = false;
    j["error"] = "complex-profile requires an earlier successful ge-fit task";
    out.report_json = j.dump(2) + "\n";
    return out;
  }
  const SpectralOperator& A = ctx.get_op();
  double m = sec.get_double("m", ctx.last_ge->m);
  std::vector<double> thetas = sec.has("thetas")
                                   ? sec.get_list("thetas")
                                   : std::vector<double>{0.0, 0.35, 0.7, 1.0, 1.2, 1.45};
  std::vector<double> zs = sec.has("z_grid") ? sec.get_list("z_grid") : ctx.last_ge->t_grid;
  double d_ref = sec.get_double("d_ref", ctx.get_profile().d);
  double slack = sec.get_double("slack", 0.5);
  double r2_min = sec.get_double("r2_min", 0.9);
  ComplexTimeProfile prof = complex_time_profile(A, m, thetas, zs, *ctx.last_ge, d_ref, slack);

  out.pass = prof.pass && prof.r2 >= r2_min;
  j["params"] = {{"m", m}, {"thetas", thetas}, {"z_grid", zs}, {"d_ref", d_ref},
                 {"slack", slack}, {"r2_min", r2_min}};
  j["fitted"] = {{"d_hat", prof.d_hat}, {"r2", prof.r2}, {"log_C", prof.log_C}};
  j["pass"] = out.pass;
  out.report_json = j.dump(2) + "\n";
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < thetas.size(); ++i)
    rows.push_back({thetas[i], prof.s_theta[i]});
  out.csv_files.emplace_back("profile", csv_of_columns({"theta", "s_theta"}, rows));
  return out;
}

TaskOutcome task_dispersive(Context& ctx, const ConfigSection& sec, int index,
                            std::uint64_t seed) {
  const SpectralOperator& A = ctx.get_op();
  double d = sec.get_double("d", ctx.get_profile().d);
  std::vector<double> ts = grid_from(sec, "t", 0.5, 200.0, 25);
  DispersiveFit fit = dispersive_check(A, d, ts);

  TaskOutcome out;
  out.type = "dispersive";
  out.index = index;
  out.pass = std::isfinite(fit.e_hat) && fit.C_envelope > 0.0;
  json j = base_report(ctx, out.type, seed);
  j["params"] = {{"d", d}, {"t_grid", ts}};
  j["fitted"] = {{"e_hat", fit.e_hat}, {"C_envelope", fit.C_envelope},
                 {"t_cutoff", fit.t_cutoff}, {"used", fit.used}};
  j["pass"] = out.pass;
  out.report_json = j.dump(2) + "\n";
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < ts.size(); ++i) rows.push_back({ts[i], fit.norms[i]});
  out.csv_files.emplace_back("norms", csv_of_columns({"t", "norm_1_to_inf"}, rows));
  return out;
}

TaskOutcome task_rbound_profile(Context& ctx, const ConfigSection& sec, int index,
                                std::uint64_t seed) {
  const SpectralOperator& A = ctx.get_op();
  double p = sec.get_double("p", ctx.lebesgue_p());
  LatticeSpec Y = ctx.lattice();
  std::vector<double> thetas = sec.has("thetas")
                                   ? sec.get_list("thetas")
                                   : std::vector<double>{0.0, 0.3, 0.6, 0.9, 1.2, 1.45};
  std::vector<double> ts = grid_from(sec, "t", 0.2, 5.0, 8);
  int trials = sec.get_int("trials", 16);
  int K = sec.get_int("K", std::min<int>(8, static_cast<int>(ts.size())));
  double margin = sec.get_double("margin", 0.1);
  double alpha = alpha_exponent(p, ctx.convexity_pY(), ctx.concavity_qY());
  double alpha_tilde = alpha_tilde_exponent(p, ctx.convexity_pY(), ctx.concavity_qY());
  double d_hat = ctx.get_profile().d;
  double envelope_alpha = sec.get_double("envelope_alpha", alpha * d_hat + margin);
  RBoundProfile prof =
      semigroup_rbound_profile(A, p, Y, thetas, ts, trials, K, seed, envelope_alpha);

  TaskOutcome out;
  out.type = "rbound-profile";
  out.index = index;
  out.pass = prof.envelope_holds;
  json j = base_report(ctx, out.type, seed);
  j["params"] = {{"p", p}, {"lattice", Y.describe()}, {"thetas", thetas}, {"t_grid", ts},
                 {"trials", trials}, {"K", K}, {"alpha", alpha},
                 {"alpha_tilde", alpha_tilde}, {"d_hat", d_hat}, {"margin", margin}};
  j["fitted"] = {{"C_hat", prof.C_hat}, {"alpha_hat", prof.alpha_hat},
                 {"envelope_alpha", envelope_alpha}, {"envelope_C", prof.envelope_C},
                 {"envelope_alpha_tilde", alpha_tilde * d_hat + margin},
                 {"alpha_consistent", prof.alpha_hat <= envelope_alpha + 1e-12},
                 {"alpha_tilde_consistent",
                  prof.alpha_hat <= alpha_tilde * d_hat + margin + 1e-12}};
  j["pass"] = out.pass;
  out.report_json = j.dump(2) + "\n";
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < thetas.size(); ++i)
    rows.push_back({thetas[i], prof.r_hat[i],
                    prof.envelope_C * std::pow(std::cos(thetas[i]), -envelope_alpha)});
  out.csv_files.emplace_back("profile",
                             csv_of_columns({"theta", "r_hat", "envelope"}, rows));
  return out;
}

TaskOutcome task_square_test(Context& ctx, const ConfigSection& sec, int index,
                             std::uint64_t seed) {
  const SpectralOperator& A = ctx.get_op();
  double p = sec.get_double("p", ctx.lebesgue_p());
  LatticeSpec Y = ctx.lattice();
  double alpha = alpha_exponent(p, ctx.convexity_pY(), ctx.concavity_qY());
  double beta = sec.get_double("beta", alpha * ctx.get_profile().d + 0.6);
  int families = sec.get_int("families", 200);
  int K = sec.get_int("K", 8);
  double stability = sec.get_double("stability", 2.0);
  HormanderParams params = ctx.spectral_params(beta);
  params.samples = sec.get_int("samples", params.samples);
  SquareTestBatch batch = multiplier_square_batch(A, p, Y, beta, params, families, K, seed);

  double hi = std::max(batch.half1_max, batch.half2_max);
  double lo = std::min(batch.half1_max, batch.half2_max);
  TaskOutcome out;
  out.type = "square-test";
  out.index = index;
  out.pass = std::isfinite(batch.c_max) && lo > 0.0 && hi <= stability * lo;
  json j = base_report(ctx, out.type, seed);
  j["params"] = {{"p", p}, {"lattice", Y.describe()}, {"beta", beta},
                 {"families", families}, {"K", K}, {"stability", stability}};
  j["fitted"] = {{"c_max", batch.c_max}, {"half1_max", batch.half1_max},
                 {"half2_max", batch.half2_max}};
  j["pass"] = out.pass;
  out.report_json = j.dump(2) + "\n";
  return out;
}

TaskOutcome task_paley_littlewood(Context& ctx, const ConfigSection& sec, int index,
                                  std::uint64_t seed) {
  const SpectralOperator& A = ctx.get_op();
  double p = sec.get_double("p", ctx.lebesgue_p());
  LatticeSpec Y = ctx.lattice();
  int fields = sec.get_int("fields", 50);
  double stability = sec.get_double("stability", 1.2);
  int k_lo, k_hi;
  if (sec.has("k_lo")) {
    k_lo = sec.get_int("k_lo");
    k_hi = sec.get_int("k_hi");
  } else {
    k_lo = static_cast<int>(std::floor(std::log2(A.lambda_min_positive()))) - 1;
    k_hi = static_cast<int>(std::ceil(std::log2(std::max(A.lambda_max(), 1e-12)))) + 1;
  }
  DyadicPartition part(k_lo, k_hi);

  double phi_lo = std::numeric_limits<double>::infinity(), phi_hi = 0.0;
  double psi_lo = phi_lo, psi_hi = 0.0;
  for (int i = 0; i < fields; ++i) {
    VectorField f = random_field(A.space(), Y.dim(), Rng::derive(seed, i));
    PaleyLittlewoodResult res = paley_littlewood(f, A, p, Y, part);
    phi_lo = std::min(phi_lo, res.ratio_phi);
    phi_hi = std::max(phi_hi, res.ratio_phi);
    psi_lo = std::min(psi_lo, res.ratio_psi);
    psi_hi = std::max(psi_hi, res.ratio_psi);
  }

  TaskOutcome out;
  out.type = "paley-littlewood";
  out.index = index;
  out.pass = phi_lo > 0.0 && psi_lo > 0.0 && std::isfinite(phi_hi) && std::isfinite(psi_hi) &&
             phi_hi <= stability * phi_lo && psi_hi <= stability * psi_lo;
  json j = base_report(ctx, out.type, seed);
  j["params"] = {{"p", p}, {"lattice", Y.describe()}, {"fields", fields},
                 {"k_lo", k_lo}, {"k_hi", k_hi}, {"stability", stability}};
  j["fitted"] = {{"ratio_phi_min", phi_lo}, {"ratio_phi_max", phi_hi},
                 {"ratio_psi_min", psi_lo}, {"ratio_psi_max", psi_hi}};
  j["pass"] = out.pass;
  out.report_json = j.dump(2) + "\n";
  return out;
}

TaskOutcome task_cz(Context& ctx, const ConfigSection& sec, int index, std::uint64_t seed) {
  const Space& s = ctx.get_space();
  double delta = sec.get_double("delta", 0.5);
  DyadicSystem sys = DyadicSystem::build(s, delta, sec.get_seed("system_seed", seed));
  int trials = sec.get_int("trials", 100);
  double stability = sec.get_double("stability", 2.0);

  double recon_max = 0.0, c_good_max = 0.0, c_mass_max = 0.0;
  int overlap_max = 0;
  double half1 = 0.0, half2 = 0.0;
  int done = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(Rng::derive(seed, t));
    Vec f(s.size());
    for (int i = 0; i < s.size(); ++i) f(i) = rng.gaussian();
    double l1 = 0.0;
    for (int i = 0; i < s.size(); ++i) l1 += s.mu(i) * std::abs(f(i));
    double lo = l1 / s.total_mass();
    double hi = 0.9 * f.cwiseAbs().maxCoeff();
    if (hi <= lo) continue;
    double lambda = lo + (hi - lo) * rng.uniform(0.05, 0.95);
    CzDecomposition dec = cz_decompose(s, sys, f, lambda);
    recon_max = std::max(recon_max, dec.recon_error);
    c_good_max = std::max(c_good_max, dec.c_good);
    c_mass_max = std::max(c_mass_max, dec.c_mass);
    overlap_max = std::max(overlap_max, dec.overlap);
    (t < trials / 2 ? half1 : half2) = std::max(t < trials / 2 ? half1 : half2, dec.c_sum);
    ++done;
  }
  double hi_half = std::max(half1, half2);
  double lo_half = std::min(half1, half2);

  TaskOutcome out;
  out.type = "cz";
  out.index = index;
  out.pass = done > 0 && recon_max <= 1e-12 && std::isfinite(c_good_max) &&
             std::isfinite(c_mass_max) && lo_half > 0.0 && hi_half <= stability * lo_half;
  json j = base_report(ctx, out.type, seed);
  j["params"] = {{"delta", delta}, {"trials", trials}, {"stability", stability}};
  j["fitted"] = {{"recon_max", recon_max}, {"c_good_max", c_good_max},
                 {"c_mass_max", c_mass_max}, {"overlap_max", overlap_max},
                 {"c_sum_half1", half1}, {"c_sum_half2", half2}, {"decompositions", done}};
  j["residual"] = recon_max;
  j["pass"] = out.pass;
  out.report_json = j.dump(2) + "\n";
  return out;
}

TaskOutcome task_verify_all(Context& ctx, const ConfigSection& sec, int index,
                            std::uint64_t seed) {
  const Space& s = ctx.get_space();
  json checks = json::array();
  bool all = true;
  auto record = [&](const std::string& name, bool ok) {
    checks.push_back({{"check", name}, {"pass", ok}});
    all = all && ok;
  };

  {  // doubling bound holds on a re-scan of the breakpoint grid
    double CD = ctx.get_profile().C_D;
    bool ok = true;
    for (double r : s.doubling_scan_radii())
      for (int x = 0; x < s.size(); ++x)
        ok = ok && s.volume(x, 2 * r) <= CD * s.volume(x, r) * (1 + 1e-12);
    record("space-doubling-rescan", ok);
  }
  {  // comparability constant is two-sided on a re-scan
    double C = ctx.get_profile().C_cmp;
    bool ok = true;
    for (double r : s.realized_radii())
      for (int x = 0; x < s.size() && ok; ++x)
        for (int y = 0; y < s.size(); ++y)
          if (s.dist(x, y) <= r) {
            ok = ok && s.volume(y, r) <= C * s.volume(x, r) * (1 + 1e-12) &&
                 s.volume(y, r) >= s.volume(x, r) / C * (1 - 1e-12);
            if (!ok) break;
          }
    record("space-comparability-rescan", ok);
  }
  double delta = sec.get_double("delta", 0.5);
  DyadicSystem sys = DyadicSystem::build(s, delta, Rng::derive(seed, 1));
  {
    DyadicVerifyReport rep = verify_dyadic(sys, s);
    record("dyadic-partition-nesting", rep.pass && rep.achieved_c1 > 0.0);
  }
  {  // conditional expectation identities
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      VectorField f = random_field(s, 2, Rng::derive(seed, 100 + trial));
      for (int k = sys.level_min(); k <= sys.level_max() && ok; ++k) {
        VectorField ek = conditional_expectation(sys, k, s, f);
        ok = ok && (conditional_expectation(sys, k, s, ek) - ek).cwiseAbs().maxCoeff() <= 1e-12;
        for (int l = k; l <= sys.level_max() && ok; ++l)
          ok = ok && (conditional_expectation(sys, k, s,
                                              conditional_expectation(sys, l, s, f)) -
                      ek)
                             .cwiseAbs()
                             .maxCoeff() <= 1e-12;
        for (int w = 0; w < 2 && ok; ++w) {
          Complex a = 0, b = 0;
          for (int x = 0; x < s.size(); ++x) {
            a += s.mu(x) * ek(x, w);
            b += s.mu(x) * f(x, w);
          }
          ok = ok && std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
        }
      }
    }
    record("conditional-expectation-identities", ok);
  }
  {  // k_of_r inequality
    Rng rng(Rng::derive(seed, 2));
    bool ok = true;
    for (int i = 0; i < 2000 && ok; ++i) {
      double r = std::pow(10.0, rng.uniform(-3.0, 3.0));
      double dl = rng.uniform(1e-6, 0.5);
      int k = k_of_r(r, dl);
      double dk = std::pow(dl, k);
      ok = dl * r <= 4.0 * dk && 4.0 * dk < r;
    }
    record("k-of-r-inequality", ok);
  }
  {  // M^q identity and N_{q,r} domination
    bool ok = true;
    for (int trial = 0; trial < 10 && ok; ++trial) {
      VectorField f = random_field(s, 2, Rng::derive(seed, 200 + trial));
      for (double q : {1.0, 2.0, 3.0}) {
        RealField direct = m_hl_q(s, q, f);
        VectorField powq = f.cwiseAbs().array().pow(q).matrix().cast<Complex>();
        RealField via = m_hl(s, powq).array().pow(1.0 / q).matrix();
        ok = ok && (direct - via).cwiseAbs().maxCoeff() <= 1e-12;
        for (double r : {1.0, 2.0})
          ok = ok && ((direct - n_q_r(s, q, r, f)).array() >= -1e-12).all();
      }
    }
    record("mhl-q-identity", ok);
  }
  {  // dyadic domination of M_HL
    AdjacentFamily fam = AdjacentFamily::build(s, delta, 2, Rng::derive(seed, 3));
    bool ok = fam.covered();
    if (ok) {
      VectorField f = random_field(s, 2, Rng::derive(seed, 4));
      double c = domination_constant(s, fam, f);
      ok = std::isfinite(c) && c > 0.0;
    }
    record("dyadic-domination", ok);
  }

  bool have_operator = ctx.cfg.has_section("operator");
  if (have_operator) {
    const SpectralOperator& A = ctx.get_op();
    {  // multiplicativity of the calculus
      VectorField f = random_field(s, 2, Rng::derive(seed, 5));
      Multiplier g = Multiplier::heat(Complex(0.4, 0.2));
      Multiplier h = Multiplier::bochner_riesz(2.0, std::max(A.lambda_max(), 1.0));
      Multiplier gh("product", [&](double t) { return g(t) * h(t); });
      double err = (A.apply(gh, f) - A.apply(g, A.apply(h, f))).cwiseAbs().maxCoeff();
      record("spectral-multiplicativity", err <= 1e-10);
    }
    {  // semigroup law
      bool ok = true;
      Rng rng(Rng::derive(seed, 6));
      for (int i = 0; i < 4; ++i) {
        Complex z(rng.uniform(0.0, 2.0), rng.uniform(-2.0, 2.0));
        Complex w(rng.uniform(0.0, 2.0), rng.uniform(-2.0, 2.0));
        CMat lhs = A.semigroup_kernel(z + w);
        CMat rhs = A.semigroup_kernel(z) * s.weights().cast<Complex>().asDiagonal() *
                   A.semigroup_kernel(w);
        ok = ok && (lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9;
      }
      record("semigroup-law", ok);
    }
    {  // partition of unity and calculus reconstruction
      int k_lo = static_cast<int>(std::floor(std::log2(std::max(A.lambda_min_positive(),
                                                                1e-12)))) - 1;
      int k_hi = static_cast<int>(std::ceil(std::log2(std::max(A.lambda_max(), 1e-12)))) + 1;
      DyadicPartition part(k_lo, k_hi);
      bool ok = true;
      Rng rng(Rng::derive(seed, 7));
      for (int i = 0; i < 200; ++i) {
        double t = std::pow(2.0, rng.uniform(k_lo + 0.0, k_hi + 0.0));
        ok = ok && part.partition_residual(t) <= 1e-10;
      }
      record("partition-residual", ok);
      VectorField f = A.range_projection(random_field(s, 2, Rng::derive(seed, 8)));
      int K = std::max(std::abs(k_lo), std::abs(k_hi));
      double resid = 0.0;
      VectorField via = calculus_apply(Multiplier::heat(1.0), A, part, K, f, &resid);
      VectorField direct = A.apply(Multiplier::heat(1.0), f);
      record("calculus-reconstruction",
             resid <= 1e-10 && (via - direct).cwiseAbs().maxCoeff() <= 1e-8);
      LatticeSpec Y = ctx.lattice();
      VectorField g =
          A.range_projection(random_field(s, Y.dim(), Rng::derive(seed, 9)));
      PaleyLittlewoodResult pl = paley_littlewood(g, A, ctx.lebesgue_p(), Y, part);
      record("paley-littlewood-finite",
             pl.ratio_phi > 0 && std::isfinite(pl.ratio_phi) && pl.ratio_psi > 0 &&
                 std::isfinite(pl.ratio_psi));
    }
    {  // quick GE feasibility
      GaussianFit fit = fit_gaussian(A, 2.0, log_grid(0.25, 4.0, 5),
                                     log_grid(1.0 / 32.0, 2.0, 9));
      record("ge-fit-feasible", fit.pass);
    }
    {  // local-average domination of the semigroup by M^{q0}
      VectorField f = random_field(s, 2, Rng::derive(seed, 10));
      double c_dom = ku08_domination(
          s, 1.0, 2.0, [&](double t) { return A.apply(Multiplier::heat(t), f); },
          [](double t) { return std::sqrt(t); }, log_grid(0.25, 4.0, 5), f);
      record("ku08-domination", std::isfinite(c_dom) && c_dom > 0.0);
    }
  }
  {  // Rademacher second moment on the Hilbert lattice
    LatticeSpec H = LatticeSpec::seq(2.0, 2);
    std::vector<VectorField> fields;
    for (int k = 0; k < 6; ++k) fields.push_back(random_field(s, 2, Rng::derive(seed, 300 + k)));
    RademacherOptions opt2;
    opt2.moment = 2;
    double lhs = rademacher_norm(2.0, H, s, fields, opt2);
    double rhs = 0.0;
    for (const auto& f : fields) rhs += std::pow(bochner_norm(2.0, H, s, f), 2);
    rhs = std::sqrt(rhs);
    record("rademacher-hilbert-identity", std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, rhs));
  }

  TaskOutcome out;
  out.type = "verify-all";
  out.index = index;
  out.pass = all;
  json j = base_report(ctx, out.type, seed);
  j["params"] = {{"delta", delta}};
  j["checks"] = checks;
  j["pass"] = all;
  out.report_json = j.dump(2) + "\n";
  return out;
}

}  // namespace

Space space_from_section(const ConfigSection& sec) {
  std::string kind = sec.get_string("kind", "cycle");
  if (kind == "cycle") return Space::cycle(sec.get_int("n"));
  if (kind == "path") return Space::path(sec.get_int("n"));
  if (kind == "torus") return Space::torus(sec.get_int("side"), sec.get_int("dims", 2));
  if (kind == "cloud")
    return Space::random_cloud(sec.get_int("n"), sec.get_int("dim", 2),
                               sec.get_seed("seed", 1));
  if (kind == "file") return Space::load_file(sec.raw("path"));
  fail(ErrCode::parse, "unknown space kind '" + kind + "'");
}

SpectralOperator operator_from_section(const ConfigSection& sec, const Space& s) {
  std::string kind = sec.get_string("kind", "laplacian");
  double scale = sec.get_double("scale", 1.0);
  if (kind == "laplacian") {
    SpectralOperator base = SpectralOperator::graph_laplacian(s, sec.get_double("edge", 1.0));
    if (scale == 1.0) return base;
    return SpectralOperator::decompose(Mat(scale * base.matrix()), s);
  }
  if (kind == "zero") return SpectralOperator::decompose(Mat::Zero(s.size(), s.size()), s);
  if (kind == "file")
    return SpectralOperator::decompose(Mat(scale * load_matrix_file(sec.raw("path"))), s);
  fail(ErrCode::parse, "unknown operator kind '" + kind + "'");
}

ScenarioOutcome run_scenario(const Config& cfg, const RunOptions& opt) {
  Context ctx(cfg, opt);
  if (opt.threads > 0) set_default_threads(opt.threads);
  ScenarioOutcome outcome;
  outcome.name = ctx.name;

  int index = 0;
  for (const ConfigSection* sec : cfg.tasks()) {
    const std::string& type = sec->arg;
    require(!type.empty(), ErrCode::parse,
            "config line " + std::to_string(sec->line) + ": task section needs a type");
    ++index;
    if (!opt.task_filter.empty() && type != opt.task_filter) {
      // complex-profile consumes the preceding ge-fit, so keep that dependency
      if (!(opt.task_filter == "complex-profile" && type == "ge-fit")) continue;
    }
    std::uint64_t seed = sec->get_seed("seed", Rng::derive(ctx.seed, index));
    TaskOutcome task;
    try {
    if (type == "dyadic-verify")
      task = task_dyadic_verify(ctx, *sec, index, seed);
    else if (type == "maximal-sweep")
      task = task_maximal_sweep(ctx, *sec, index, seed);
    else if (type == "hormander-norm")
      task = task_hormander_norm(ctx, *sec, index, seed);
    else if (type == "ge-fit")
      task = task_ge_fit(ctx, *sec, index, seed);
    else if (type == "gge-check")
      task = task_gge_check(ctx, *sec, index, seed);
    else if (type == "complex-profile")
      task = task_complex_profile(ctx, *sec, index, seed);
    else if (type == "dispersive")
      task = task_dispersive(ctx, *sec, index, seed);
    else if (type == "rbound-profile")
      task = task_rbound_profile(ctx, *sec, index, seed);
    else if (type == "square-test")
      task = task_square_test(ctx, *sec, index, seed);
    else if (type == "paley-littlewood")
      task = task_paley_littlewood(ctx, *sec, index, seed);
    else if (type == "cz")
      task = task_cz(ctx, *sec, index, seed);
    else if (type == "verify-all")
      task = task_verify_all(ctx, *sec, index, seed);
    else
      fail(ErrCode::parse,
           "config line " + std::to_string(sec->line) + ": unknown task type '" + type + "'");
    } catch (const Error& e) {
      if (e.code() == ErrCode::parse) throw;  // config defects abort the run
      task.type = type;
      task.index = index;
      task.pass = false;
      json j = base_report(ctx, type, seed);
      j["pass"] = false;
      j["error"] = e.what();
      task.report_json = j.dump(2) + "\n";
    }
    outcome.all_pass = outcome.all_pass && task.pass;
    outcome.tasks.push_back(std::move(task));
  }

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["scenario"] = outcome.name;
  summary["all_pass"] = outcome.all_pass;
  json items = json::array();
  for (const auto& t : outcome.tasks)
    items.push_back({{"task", t.type}, {"index", t.index}, {"pass", t.pass}});
  summary["tasks"] = items;
  outcome.summary_json = summary.dump(2) + "\n";
  return outcome;
}

ScenarioOutcome run_scenario_file(const std::string& path, const RunOptions& opt) {
  return run_scenario(Config::parse_file(path), opt);
}

void write_outcome(const ScenarioOutcome& outcome, const std::string& out_dir) {
  if (out_dir.empty()) return;
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::string& name, const std::string& contents) {
    std::ofstream os(std::filesystem::path(out_dir) / name, std::ios::binary);
    require(os.good(), ErrCode::io, "cannot write " + name + " in " + out_dir);
    os << contents;
  };
  for (const auto& t : outcome.tasks) {
    std::string stem = "task-" + std::to_string(t.index) + "-" + t.type;
    write(stem + ".json", t.report_json);
    for (const auto& [name, contents] : t.csv_files)
      write(stem + "-" + name + ".csv", contents);
  }
  write("summary.json", outcome.summary_json);
}

std::string merge_reports(const std::vector<std::string>& reports) {
  struct Row {
    std::string scenario, task, headline;
    bool pass;
    double p, s, m;
  };
  std::vector<Row> rows;
  for (const auto& text : reports) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      fail(ErrCode::parse, std::string("report merge: bad JSON: ") + e.what());
    }
    require(j.contains("schema_version") && j["schema_version"] == kSchemaVersion,
            ErrCode::invalid_argument, "report merge: schema mismatch");
    Row row;
    row.scenario = j.value("scenario", "");
    row.task = j.value("task", "");
    row.pass = j.value("pass", false);
    const json params = j.value("params", json::object());
    auto num = [&](const char* key) {
      return params.contains(key) && params[key].is_number()
                 ? params[key].get<double>()
                 : std::numeric_limits<double>::quiet_NaN();
    };
    row.p = num("p");
    row.s = num("s");
    row.m = num("m");
    std::ostringstream head;
    head.precision(12);
    const json fitted = j.value("fitted", json::object());
    bool first = true;
    for (auto it = fitted.begin(); it != fitted.end(); ++it) {
      if (!it.value().is_number()) continue;
      head << (first ? "" : ";") << it.key() << "=" << it.value().get<double>();
      first = false;
    }
    row.headline = head.str();
    rows.push_back(std::move(row));
  }
  auto key = [](const Row& r) {
    auto safe = [](double v) { return std::isnan(v) ? -1.0 : v; };
    return std::make_tuple(r.scenario, r.task, safe(r.p), safe(r.s), safe(r.m));
  };
  std::sort(rows.begin(), rows.end(),
            [&](const Row& a, const Row& b) { return key(a) < key(b); });
  std::ostringstream os;
  os << "scenario, task, pass, p, s, m, headline\n";
  os.precision(12);
  for (const auto& r : rows) {
    os << r.scenario << ", " << r.task << ", " << (r.pass ? "1" : "0") << ", ";
    auto field = [&](double v) {
      if (std::isnan(v))
        os << "";
      else
        os << v;
      os << ", ";
    };
    field(r.p);
    field(r.s);
    field(r.m);
    os << r.headline << "\n";
  }
  return os.str();
}

}  // namespace smlab
