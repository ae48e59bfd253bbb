#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "prpca/prpca.hpp"

namespace fs = std::filesystem;
using namespace prpca;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFormat = 2;
constexpr int kExitSolver = 3;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::FormatError: return kExitFormat;
    case Errc::NumericalFailure: return kExitSolver;
    default: return kExitUsage;
  }
}

struct RecoverArgs {
  std::string in;
  std::string kind;
  double sigma = 0.0;
  std::string clean;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::optional<int> max_iters;
  std::string out;
  std::string metrics;
};

int run_recover(const RecoverArgs& a) {
  const PairKind kind = parse_pair_kind(a.kind);
  const GrayImage input = load_pgm(a.in);
  std::optional<GrayImage> clean;
  if (!a.clean.empty()) clean = load_pgm(a.clean);

  // With --seed the input is treated as clean and noise is added here.
  GrayImage noisy = input;
  if (a.seed) {
    noisy = add_noise(input, a.sigma, *a.seed);
    if (!clean) clean = input;
  }

  RecoverOverrides ov;
  ov.lambda1 = a.lambda1;
  ov.lambda2 = a.lambda2;
  ov.max_iters = a.max_iters;
  if (clean) ov.clean = &*clean;
  const RecoverResult res = recover(noisy, kind, a.sigma, ov);
  const Index clamped = save_pgm(a.out, res.image);
  const RecoverMetrics& m = res.metrics;

  if (!a.metrics.empty()) {
    std::string csv = "in,kind,sigma,lambda1,lambda2,rmse,seconds,iterations,converged,clamped,status\n";
    csv += a.in + ',' + to_string(kind) + ',' + format_double(a.sigma) + ',' + format_double(m.lambda1) + ',' +
           format_double(m.lambda2) + ',' + (m.rmse ? format_double(*m.rmse) : std::string("nan")) + ',' +
           format_double(m.seconds) + ',' + std::to_string(m.iterations) + ',' + (m.converged ? "true" : "false") +
           ',' + std::to_string(clamped) + ',' + (m.converged ? "ok" : "max_iters") + '\n';
    write_file(a.metrics, csv);
  }
  std::cout << "kind=" << to_string(kind) << " iterations=" << m.iterations << " seconds=" << m.seconds
            << " clamped=" << clamped;
  if (m.rmse) std::cout << " rmse=" << *m.rmse;
  std::cout << '\n';
  return kExitOk;
}

int run_simulate(const std::string& spec_path, const std::string& out, bool no_timing) {
  std::vector<SimulationSpec> specs = specs_from_key_values(parse_key_values(read_file(spec_path)));
  if (no_timing) {
    for (SimulationSpec& s : specs) s.timing = false;
  }
  const std::vector<GridRow> rows = run_grid(specs);
  write_file(out, grid_to_csv(rows));
  int failed = 0;
  for (const GridRow& r : rows) failed += r.status.rfind("error:", 0) == 0 ? 1 : 0;
  std::cout << rows.size() << " rows written to " << out;
  if (failed > 0) std::cout << " (" << failed << " failed)";
  std::cout << '\n';
  return failed > 0 ? kExitSolver : kExitOk;
}

std::optional<double> optional_double(const std::map<std::string, std::string>& kv, const char* key) {
  const auto it = kv.find(key);
  if (it == kv.end()) return std::nullopt;
  return parse_double(it->second);
}

int run_diagnose(const std::string& dir, const std::string& out) {
  const fs::path d(dir);
  const auto kv = parse_key_values(read_file((d / "params.txt").string()));
  const Matrix x0 = read_matrix_csv((d / "X0.csv").string());
  const Matrix y0 = read_matrix_csv((d / "Y0.csv").string());
  const Matrix e = read_matrix_csv((d / "E.csv").string());

  const auto kind_it = kv.find("kind");
  const PairKind kind = parse_pair_kind(kind_it == kv.end() ? "single" : kind_it->second);
  const ProjectorPair pair = kind == PairKind::Custom
                                 ? custom_pair(read_matrix_csv((d / "P.csv").string()),
                                               read_matrix_csv((d / "Q.csv").string()))
                                 : projector_pair(kind, y0.rows(), y0.cols());

  DiagnoseOptions opt;
  std::optional<double> l1 = optional_double(kv, "lambda1");
  std::optional<double> l2 = optional_double(kv, "lambda2");
  if (!l1 || !l2) {
    const std::optional<double> sigma = optional_double(kv, "sigma");
    detail::require(sigma.has_value(), Errc::InvalidParameter, "params.txt needs lambda1 and lambda2, or sigma");
    const Penalties p = default_penalties(y0.rows(), *sigma);
    if (!l1) l1 = p.lambda1;
    if (!l2) l2 = p.lambda2;
  }
  opt.lambda1 = *l1;
  opt.lambda2 = *l2;
  if (auto c = optional_double(kv, "c")) opt.c = *c;
  if (auto eta0 = optional_double(kv, "eta0")) opt.eta0 = *eta0;
  opt.eta1 = optional_double(kv, "eta1");
  opt.rho = optional_double(kv, "rho");

  const DiagnosticsReport rep = diagnose(x0, y0, e, pair, opt);
  write_file(out, "kind=" + std::string(to_string(kind)) + "\n" + to_key_value(rep));
  std::cout << "alpha*beta=" << rep.alpha * rep.beta << " margin=" << rep.identifiability_margin
            << " conditions=" << rep.penalty_ok.c1 << rep.penalty_ok.c2 << rep.penalty_ok.c3 << '\n';
  return kExitOk;
}

int run_generate(const std::string& spec_path, int rep, const std::string& dir) {
  const std::vector<SimulationSpec> specs = specs_from_key_values(parse_key_values(read_file(spec_path)));
  detail::require(specs.size() == 1, Errc::InvalidParameter, "generate needs a spec with a single grid point");
  const SimulationSpec& s = specs.front();
  const Instance inst = generate_instance(s, rep);
  fs::create_directories(dir);
  const fs::path d(dir);
  write_matrix_csv((d / "X0.csv").string(), inst.X0);
  write_matrix_csv((d / "Y0.csv").string(), inst.Y0);
  write_matrix_csv((d / "E.csv").string(), inst.E);
  write_matrix_csv((d / "Z.csv").string(), inst.Z);
  std::string params = "kind=single\n";
  if (s.sigma > 0.0) params += "sigma=" + format_double(s.sigma) + "\n";
  write_file((d / "params.txt").string(), params);
  std::cout << "instance written to " << dir << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected robust PCA toolkit"};
  app.require_subcommand(1);

  RecoverArgs ra;
  auto* rec = app.add_subcommand("recover", "Denoise a PGM image");
  rec->add_option("--in", ra.in, "Input image (binary PGM)")->required();
  rec->add_option("--kind", ra.kind, "identity | single | double")
      ->required()
      ->check(CLI::IsMember({"identity", "single", "double"}));
  rec->add_option("--sigma", ra.sigma, "Noise level")->required();
  rec->add_option("--clean", ra.clean, "Clean reference image for RMSE");
  rec->add_option("--seed", ra.seed, "Add N(0, sigma^2) noise to the input with this seed");
  rec->add_option("--lambda1", ra.lambda1, "Nuclear-norm penalty");
  rec->add_option("--lambda2", ra.lambda2, "Entrywise l1 penalty");
  rec->add_option("--max-iters", ra.max_iters, "Iteration cap");
  rec->add_option("--out", ra.out, "Output image")->required();
  rec->add_option("--metrics", ra.metrics, "Metrics CSV");

  std::string spec_path, sim_out;
  bool no_timing = false;
  auto* sim = app.add_subcommand("simulate", "Run a simulation grid");
  sim->add_option("--spec", spec_path, "key=value spec file")->required();
  sim->add_option("--out", sim_out, "Output CSV")->required();
  sim->add_flag("--no-timing", no_timing, "Write 0 in the seconds column");

  std::string inst_dir, diag_out;
  auto* dia = app.add_subcommand("diagnose", "Evaluate identifiability diagnostics for an instance");
  dia->add_option("--instance", inst_dir, "Instance directory")->required();
  dia->add_option("--out", diag_out, "Output report")->required();

  std::string gen_spec, gen_dir;
  int gen_rep = 0;
  auto* gen = app.add_subcommand("generate", "Write a simulated instance directory");
  gen->add_option("--spec", gen_spec, "key=value spec file")->required();
  gen->add_option("--rep", gen_rep, "Replicate index");
  gen->add_option("--out", gen_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*rec) return run_recover(ra);
    if (*sim) return run_simulate(spec_path, sim_out, no_timing);
    if (*dia) return run_diagnose(inst_dir, diag_out);
    if (*gen) return run_generate(gen_spec, gen_rep, gen_dir);
  } catch (const Error& e) {
    std::cerr << "prpca: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "prpca: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
