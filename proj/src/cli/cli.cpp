#include "kpod/cli.hpp"

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "kpod/error.hpp"
#include "kpod/parallel.hpp"

namespace kpod::cli {

namespace {

Centering parse_centering(const std::string& s) {
  if (s == "feature") return Centering::feature_space;
  if (s == "none") return Centering::none;
  throw Error(Errc::usage, "unknown centering '" + s + "' (expected feature or none)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel-POD reduced-order modeling toolkit", "kpod"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  int jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads (KPOD_JOBS overrides)")->check(CLI::PositiveNumber);

  // offline
  OfflineArgs off;
  std::string off_problem, off_centering = "feature";
  std::optional<double> beta, kpca_tol;
  std::optional<int> rank;
  std::uint64_t off_seed = adv2d::kDefaultSeed2D;
  auto* offline = app.add_subcommand("offline", "Snapshot campaign, kernel PCA and tessellation");
  offline->add_option("--problem", off_problem, "adv1d or adv2d")->required()->check(CLI::IsMember({"adv1d", "adv2d"}));
  offline->add_option("--eps", off.config.epsilon, "POD truncation tolerance")->check(CLI::Range(1e-16, 0.5));
  offline->add_option("--kernel", off.config.kernel, "centroid1d, centroid2d or gaussian")
      ->check(CLI::IsMember({"centroid1d", "centroid2d", "gaussian"}));
  offline->add_option("--beta", beta, "Kernel width parameter")->check(CLI::PositiveNumber);
  offline->add_option("--kpca-tol", kpca_tol, "Tolerance on the kernel spectrum")->check(CLI::Range(1e-16, 0.5));
  offline->add_option("--k", rank, "Reduced dimension (overrides --kpca-tol)")->check(CLI::Range(1, 3));
  offline->add_option("--centering", off_centering, "Gram centering: feature or none")
      ->check(CLI::IsMember({"feature", "none"}));
  offline->add_option("--ns", off.config.ns, "2D snapshot count")->check(CLI::Range(3, 100000));
  offline->add_option("--seed", off_seed, "2D sampling seed");
  offline->add_option("--h", off.config.h, "2D mesh size")->check(CLI::Range(0.005, 0.25));
  offline->add_option("--out", off.out, "Model directory")->required();
  offline->add_option("--spectrum-rows", off.spectrum_rows, "Spectrum rows to print")->check(CLI::NonNegativeNumber);

  // online
  OnlineArgs on;
  std::string on_strategy = "kpod", on_levels = "1/2", on_reference;
  auto* online = app.add_subcommand("online", "Reduced query against a stored model");
  online->add_option("--model", on.model, "Model directory")->required();
  online->add_option("--strategy", on_strategy, "kpod, pod, qpod or full")
      ->check(CLI::IsMember({"kpod", "pod", "qpod", "full"}));
  online->add_option("--levels", on_levels, "Connectivity levels L/L+1");
  online->add_option("--velocity", on.velocity, "adv1d advection speed")->check(CLI::Range(0.1, 10.0));
  online->add_option("--steps", on.steps, "adv1d time steps")->check(CLI::Range(1, 100000));
  online->add_option("--source", on.source, "adv2d source position")->check(CLI::Range(-1.0, 1.0));
  online->add_option("--angle", on.angle, "adv2d advection angle in degrees")->check(CLI::Range(0.0, 90.0));
  online->add_option("--reference", on_reference, "Compare against: full")->check(CLI::IsMember({"full"}));
  online->add_option("--solution", on.solution, "Solution CSV path");
  online->add_option("--trace", on.trace, "Path-trace CSV path");
  online->add_option("--qpod-max-columns", on.qpod_columns, "Memory guard for qpod")->check(CLI::PositiveNumber);

  // bench
  BenchArgs bench;
  std::string bench_format = "csv", bench_levels = "1/2";
  std::optional<std::filesystem::path> bench_out, bench_model;
  auto* bench_cmd = app.add_subcommand("bench", "Regenerate a benchmark table");
  bench_cmd->add_option("table", bench.table, "table-1d, table-1d-kpod, table-1d-levels or table-2d")
      ->required()
      ->check(CLI::IsMember({"table-1d", "table-1d-kpod", "table-1d-levels", "table-2d"}));
  bench_cmd->add_option("--format", bench_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  bench_cmd->add_option("--out", bench_out, "Directory for the table and solution profiles");
  bench_cmd->add_option("--model", bench_model, "Reuse a stored model instead of running the offline phase");
  bench_cmd->add_option("--levels", bench_levels, "Connectivity levels L/L+1");
  bench_cmd->add_option("--ns", bench.ns, "2D snapshot count")->check(CLI::Range(3, 100000));
  bench_cmd->add_option("--seed", bench.seed, "2D sampling seed");
  bench_cmd->add_option("--h", bench.h, "2D mesh size")->check(CLI::Range(0.005, 0.25));
  bench_cmd->add_option("--qpod-max-columns", bench.qpod_columns, "Memory guard for qpod")->check(CLI::PositiveNumber);

  // mesh
  MeshArgs mesh;
  auto* mesh_cmd = app.add_subcommand("mesh", "Generate or inspect a 2D mesh");
  auto* gen = mesh_cmd->add_subcommand("generate", "Write a generated mesh");
  gen->add_option("--h", mesh.h, "Mesh size")->check(CLI::Range(0.005, 0.25));
  gen->add_option("--hole", mesh.hole_radius, "Hole radius")->check(CLI::Range(0.0, 0.9));
  gen->add_option("--out", mesh.file, "Mesh file")->required();
  auto* inspect = mesh_cmd->add_subcommand("inspect", "Summarize a mesh file");
  inspect->add_option("--in", mesh.file, "Mesh file")->required()->check(CLI::ExistingFile);
  mesh_cmd->require_subcommand(1);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  jobs = resolve_jobs(jobs);
  try {
    if (offline->parsed()) {
      off.config.problem = parse_problem(off_problem);
      off.config.beta = beta;
      off.config.kpca_tolerance = kpca_tol;
      off.config.rank = rank;
      off.config.centering = parse_centering(off_centering);
      off.config.seed = off_seed;
      off.config.jobs = jobs;
      cmd_offline(off, out);
    } else if (online->parsed()) {
      on.strategy = parse_strategy(on_strategy);
      on.base_level = parse_levels(on_levels);
      on.reference_full = on_reference == "full";
      cmd_online(on, out);
    } else if (bench_cmd->parsed()) {
      bench.format = parse_format(bench_format);
      bench.base_level = parse_levels(bench_levels);
      bench.out = bench_out;
      bench.model = bench_model;
      bench.jobs = jobs;
      cmd_bench(bench, out);
    } else if (mesh_cmd->parsed()) {
      mesh.action = gen->parsed() ? "generate" : "inspect";
      cmd_mesh(mesh, out);
    }
  } catch (const Error& e) {
    err << to_string(e.code()) << " error: " << e.what() << "\n";
    return e.code() == Errc::usage ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace kpod::cli
