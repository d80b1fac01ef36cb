#include "cvxgeo/cli.hpp"

#include "cvxgeo/body.hpp"
#include "cvxgeo/distance.hpp"
#include "cvxgeo/generate.hpp"
#include "cvxgeo/john.hpp"
#include "cvxgeo/json_io.hpp"
#include "cvxgeo/moduli.hpp"
#include "cvxgeo/selfcheck.hpp"
#include "cvxgeo/stability.hpp"
#include "cvxgeo/types.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

namespace cvx {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

// Input and configuration problems are the caller's to fix; everything else
// that the library raises is a solver-side failure.
int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::domain_error:
    case ErrorCode::unsupported:
    case ErrorCode::degenerate_body:
    case ErrorCode::unbounded_body:
    case ErrorCode::origin_not_interior:
      return kExitInput;
    case ErrorCode::solver_stall:
    case ErrorCode::no_contacts:
    case ErrorCode::not_nested:
    case ErrorCode::degenerate_simplex:
    case ErrorCode::infeasible_start:
    case ErrorCode::uncertified_curve:
    case ErrorCode::no_solution:
      return kExitSolver;
  }
  return kExitSolver;
}

struct OutputCfg {
  std::string path;           // empty: write to the report stream
  std::string format = "json";
};

// Reports land either on the report stream or in --out, newline-terminated.
void emit(const std::string& text, const OutputCfg& cfg, std::ostream& os) {
  if (cfg.path.empty()) {
    os << text;
    if (text.empty() || text.back() != '\n') os << '\n';
  } else {
    save_text(text, cfg.path);
  }
}

void add_output_flags(CLI::App* cmd, OutputCfg& cfg, bool csv_supported) {
  cmd->add_option("--out", cfg.path,
                  "Write the report to this file instead of stdout");
  auto* fmt = cmd->add_option("--format", cfg.format, "Report format")
                  ->capture_default_str();
  fmt->check(csv_supported ? CLI::IsMember({"json", "csv"})
                           : CLI::IsMember({"json"}));
}

Json input_stamp(const std::string& path, const ConvexBody& body) {
  Json j;
  j["path"] = path;
  j["kind"] = body_kind_name(body.kind());
  j["dim"] = body.dim();
  j["hash"] = body_hash_hex(body);
  return j;
}

// ---- distance ------------------------------------------------------------

struct DistanceCfg {
  std::vector<std::string> inputs;
  OutputCfg out;
};

int run_distance(const DistanceCfg& cfg, std::ostream& os) {
  const ConvexBody k = load_body(cfg.inputs[0]);
  const ConvexBody l = load_body(cfg.inputs[1]);
  Json doc;
  doc["inputs"] = Json::array(
      {input_stamp(cfg.inputs[0], k), input_stamp(cfg.inputs[1], l)});
  doc["grunbaum"] = to_json(grunbaum_upper(k, l));
  doc["banach_mazur"] = to_json(banach_mazur_upper(k, l));
  doc["asymmetry_lower"] = distance_lower_via_asymmetry(k, l);
  emit(dump_json(doc, 2), cfg.out, os);
  return kExitOk;
}

// ---- john ------------------------------------------------------------------

struct JohnCfg {
  std::vector<std::string> inputs;
  int restarts = 20;
  std::uint64_t seed = 7;
  double tol_contact = 1e-5;
  OutputCfg out;
};

int run_john(const JohnCfg& cfg, std::ostream& os) {
  const ConvexBody k = load_body(cfg.inputs[0]);
  const ConvexBody l = load_body(cfg.inputs[1]);
  MaxVolumeStats stats;
  const AffineMap pose = max_volume_position(k, l, &stats);
  const ConvexBody kpos = transform(pose, k);
  const JohnCertificate cert =
      decomposition_shift(kpos, l, cfg.restarts, cfg.seed);
  const DecompositionReport report =
      verify_decomposition(cert, k.dim(), cfg.tol_contact);
  Json doc;
  doc["inputs"] = Json::array(
      {input_stamp(cfg.inputs[0], k), input_stamp(cfg.inputs[1], l)});
  doc["pose"] = to_json(pose);
  doc["position_log_det"] = stats.log_det;
  doc["certificate"] = to_json(cert);
  doc["verification"] = to_json(report);
  emit(dump_json(doc, 2), cfg.out, os);
  return report.pass() ? kExitOk : kExitValidation;
}

// ---- modulus ---------------------------------------------------------------

struct ModulusCfg {
  std::vector<std::string> inputs;
  int grid = 16;
  int budget = 1024;
  OutputCfg out;
};

int run_modulus(const ModulusCfg& cfg, std::ostream& os) {
  const ConvexBody body = load_body(cfg.inputs[0]);
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(cfg.grid) + 1);
  for (int i = 0; i <= cfg.grid; ++i) {
    ts.push_back(static_cast<double>(i) / static_cast<double>(cfg.grid));
  }
  const ModulusCurve curve = build_modulus_curve(body, ts, cfg.budget);

  // For an unposed lp ball the closed form is available for comparison.
  std::vector<double> closed;
  const bool has_closed =
      body.kind() == BodyKind::lp_ball && body.pose().is_identity(1e-15);
  if (has_closed) {
    closed.reserve(ts.size());
    for (const double t : ts) {
      closed.push_back(modulus_lp(body.lp_exponent(), t).value);
    }
  }

  if (cfg.out.format == "csv") {
    emit(curve_to_csv(curve, has_closed ? &closed : nullptr), cfg.out, os);
    return kExitOk;
  }
  Json doc;
  doc["input"] = input_stamp(cfg.inputs[0], body);
  doc["curve"] = to_json(curve);
  if (has_closed) {
    Json arr = Json::array();
    for (const double v : closed) arr.push_back(v);
    doc["closed_form"] = arr;
  }
  emit(dump_json(doc, 2), cfg.out, os);
  return kExitOk;
}

// ---- stability -------------------------------------------------------------

struct StabilityCfg {
  std::vector<std::string> inputs;  // reference body, then the tested body
  int generate = 0;
  int n = 3;
  double jitter = 1e-6;
  std::uint64_t seed = 2026;
  std::string kind = "ellipsoid";
  int budget = 512;
  int threads = 0;  // 0: pick from the hardware
  OutputCfg out;
};

// Batch validation is parallel over instances: each worker owns whole
// instances and writes into its preassigned slots, so the assembled report
// is identical to a serial run.
std::vector<StabilityReport> stability_batch(const StabilityCfg& cfg,
                                             StabilityKind kind) {
  const ConvexBody l = ConvexBody::lp_ball(2.0, cfg.n);
  const int count = cfg.generate;
  std::vector<StabilityReport> reports(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));

  int workers = cfg.threads > 0
                    ? cfg.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min({workers, count, 8}));

  std::atomic<int> next{0};
  auto work = [&]() {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      const std::size_t slot = static_cast<std::size_t>(i);
      try {
        const ConvexBody k = jittered_simplex(
            cfg.n, cfg.jitter, cfg.seed, static_cast<std::uint64_t>(i));
        reports[slot] = validate_stability(l, k, kind, cfg.budget);
      } catch (...) {
        errors[slot] = std::current_exception();
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  // Surface the first failure in instance order, for a deterministic message.
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

int run_stability(const StabilityCfg& cfg, std::ostream& os) {
  const bool have_files = !cfg.inputs.empty();
  if (have_files && cfg.generate > 0) {
    fail(ErrorCode::parse_error,
         "give either two body files or --generate, not both");
  }
  if (!have_files && cfg.generate <= 0) {
    fail(ErrorCode::parse_error,
         "stability needs two body files or --generate COUNT");
  }
  const StabilityKind kind = stability_kind_from(cfg.kind);

  std::vector<StabilityReport> reports;
  if (have_files) {
    const ConvexBody l = load_body(cfg.inputs[0]);
    const ConvexBody k = load_body(cfg.inputs[1]);
    reports.push_back(validate_stability(l, k, kind, cfg.budget));
  } else {
    reports = stability_batch(cfg, kind);
  }

  int violations = 0;
  int applicable = 0;
  for (const StabilityReport& rep : reports) {
    violations += rep.violation ? 1 : 0;
    applicable += rep.applicable ? 1 : 0;
  }

  if (cfg.out.format == "csv") {
    emit(stability_csv(reports), cfg.out, os);
  } else {
    Json doc;
    doc["kind"] = stability_kind_name(kind);
    doc["instances"] = Json::array();
    for (const StabilityReport& rep : reports) {
      doc["instances"].push_back(to_json(rep));
    }
    doc["applicable"] = applicable;
    doc["violations"] = violations;
    doc["pass"] = violations == 0;
    emit(dump_json(doc, 2), cfg.out, os);
  }
  return violations == 0 ? kExitOk : kExitValidation;
}

// ---- selftest --------------------------------------------------------------

struct SelftestCfg {
  SelfcheckOptions opts;
};

int run_selftest(const SelftestCfg& cfg, std::ostream& os) {
  const std::vector<CriterionResult> results = run_selfcheck(cfg.opts, &os);
  bool all = true;
  for (const CriterionResult& r : results) all = all && r.pass;
  os << (all ? "selftest: all criteria passed\n"
             : "selftest: FAILURES present\n");
  return all ? kExitOk : kExitValidation;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{
      "cvxgeo: distances, decompositions, moduli, and proximity estimates "
      "for convex bodies"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Read option defaults from a TOML file (flags win)");

  DistanceCfg dist;
  CLI::App* cmd_distance = app.add_subcommand(
      "distance", "Distance estimates between two bodies");
  cmd_distance
      ->add_option("--input", dist.inputs, "Two body files: the positioned "
                                           "body, then the container")
      ->expected(2)
      ->required();
  add_output_flags(cmd_distance, dist.out, /*csv_supported=*/false);

  JohnCfg john;
  CLI::App* cmd_john = app.add_subcommand(
      "john", "Decomposition certificate for a positioned pair");
  cmd_john
      ->add_option("--input", john.inputs,
                   "Two body files: the polytope to position, then the "
                   "container")
      ->expected(2)
      ->required();
  cmd_john->add_option("--restarts", john.restarts, "Shift-search restarts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_john->add_option("--seed", john.seed, "Shift-search seed")
      ->capture_default_str();
  cmd_john
      ->add_option("--tol-contact", john.tol_contact,
                   "Certificate verification tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_output_flags(cmd_john, john.out, /*csv_supported=*/false);

  ModulusCfg mod;
  CLI::App* cmd_modulus = app.add_subcommand(
      "modulus", "Convexity-modulus curve of one body on [0, 1]");
  cmd_modulus->add_option("--input", mod.inputs, "One body file")
      ->expected(1)
      ->required();
  cmd_modulus
      ->add_option("--grid", mod.grid,
                   "Number of grid cells on [0, 1] (samples = grid + 1)")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  cmd_modulus
      ->add_option("--budget", mod.budget, "Estimator scan budget per sample")
      ->check(CLI::Range(8, 1 << 20))
      ->capture_default_str();
  add_output_flags(cmd_modulus, mod.out, /*csv_supported=*/true);

  StabilityCfg stab;
  CLI::App* cmd_stability = app.add_subcommand(
      "stability", "Simplex-proximity validation of near-extremal instances");
  cmd_stability->add_option(
      "--input", stab.inputs,
      "Two body files: the reference body, then the tested body");
  cmd_stability
      ->add_option("--generate", stab.generate,
                   "Generate this many jittered-simplex instances against "
                   "the round ball")
      ->check(CLI::Range(1, 100000));
  cmd_stability->add_option("--n", stab.n, "Dimension of generated instances")
      ->check(CLI::Range(2, 6))
      ->capture_default_str();
  cmd_stability
      ->add_option("--jitter", stab.jitter, "Vertex jitter of generated "
                                            "instances")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_stability->add_option("--seed", stab.seed, "Instance-generation seed")
      ->capture_default_str();
  cmd_stability
      ->add_option("--kind", stab.kind,
                   "Estimate regime: general, symmetric, or ellipsoid")
      ->check(CLI::IsMember({"general", "symmetric", "ellipsoid"}))
      ->capture_default_str();
  cmd_stability
      ->add_option("--budget", stab.budget,
                   "Modulus-estimator budget (non-ellipsoid regimes)")
      ->check(CLI::Range(8, 1 << 20))
      ->capture_default_str();
  cmd_stability
      ->add_option("--threads", stab.threads,
                   "Worker threads for batch validation (0 = auto)")
      ->check(CLI::Range(0, 64))
      ->capture_default_str();
  add_output_flags(cmd_stability, stab.out, /*csv_supported=*/true);

  SelftestCfg self;
  CLI::App* cmd_selftest = app.add_subcommand(
      "selftest", "Run the full acceptance suite with per-criterion timing");
  cmd_selftest->add_option("--seed", self.opts.seed, "Instance seed")
      ->capture_default_str();
  cmd_selftest
      ->add_option("--tol-distance", self.opts.tol_distance,
                   "Distance-comparison tolerance (validated by the suite)")
      ->capture_default_str();
  cmd_selftest
      ->add_option("--pairs-2d", self.opts.pairs_2d, "Planar random pairs")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  cmd_selftest
      ->add_option("--pairs-3d", self.opts.pairs_3d, "Spatial random pairs")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  cmd_selftest
      ->add_option("--instances", self.opts.stability_instances,
                   "Near-extremal stability instances")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  cmd_selftest
      ->add_option("--fd-points", self.opts.fd_points,
                   "Gradient finite-difference spot checks")
      ->check(CLI::Range(1, 10000))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit cleanly; genuine parse problems are input
    // errors. CLI::App::exit prints the message / help text for us.
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (cmd_distance->parsed()) return run_distance(dist, out);
    if (cmd_john->parsed()) return run_john(john, out);
    if (cmd_modulus->parsed()) return run_modulus(mod, out);
    if (cmd_stability->parsed()) return run_stability(stab, out);
    if (cmd_selftest->parsed()) return run_selftest(self, out);
    err << "error: no command selected\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

int cli_main(int argc, const char* const* argv) {
  return cli_main(argc, argv, std::cout, std::cerr);
}

}  // namespace cvx
