#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "qosg/driver.hpp"
#include "qosg/io.hpp"
#include "qosg/spectral.hpp"

namespace fs = std::filesystem;
using namespace qosg;

namespace {

constexpr int exit_error = 1;
constexpr int exit_evaluation = 2;

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

int cmd_nodes(const fs::path& workdir, const std::string& rule_name, int levels, int probes,
              const std::string& lambda_file, const std::string& nodes_file) {
  const RuleKind rule = parse_rule(rule_name);
  const NodeSequence seq = make_node_sequence(rule, levels, probes);
  const std::string stem(to_string(rule));
  auto os1 = open_out(workdir / (lambda_file.empty() ? "lambda_" + stem + ".csv" : lambda_file));
  write_node_levels_csv(os1, seq);
  auto os2 = open_out(workdir / (nodes_file.empty() ? "nodes_" + stem + ".csv" : nodes_file));
  write_nodes_csv(os2, seq);
  return 0;
}

void write_outputs(const fs::path& workdir, const RunConfig& rc, const AdaptiveState& state) {
  write_json_file(workdir / rc.checkpoint_file, to_json(state, rc.adaptive));
  auto os = open_out(workdir / rc.history_file);
  write_history_csv(os, state.history, rc.adaptive.dim);
}

int cmd_run(const fs::path& workdir, const std::string& config, bool fresh) {
  const RunConfig rc = read_run_config(workdir / config);
  const TargetSpec target = rc.make_target(workdir);
  AdaptiveState state;
  const fs::path checkpoint = workdir / rc.checkpoint_file;
  if (rc.resume && !fresh && fs::exists(checkpoint)) {
    state = state_from_json(read_json_file(checkpoint), rc.adaptive);
    std::cerr << "resuming at iteration " << state.iteration << " with " << state.cache.size()
              << " cached samples\n";
  }
  try {
    run(state, rc.adaptive, target, [&](const AdaptiveState& s) {
      write_outputs(workdir, rc, s);
      const auto& r = s.history.back();
      std::cerr << "iter " << r.iteration << "  nodes " << r.node_count;
      if (r.probe_error) std::cerr << "  error " << format_real(*r.probe_error);
      std::cerr << '\n';
    });
  } catch (const EvaluationError& e) {
    write_outputs(workdir, rc, state);
    std::cerr << "error: " << e.what() << "\nfailed point ids:";
    for (auto id : e.failed) std::cerr << ' ' << id;
    std::cerr << "\ncheckpoint written to " << checkpoint.string() << "; rerun to resume\n";
    return exit_evaluation;
  }
  write_outputs(workdir, rc, state);
  save_interpolant(workdir / rc.interpolant_file, state.interp);
  return 0;
}

int cmd_evaluate(const fs::path& workdir, const std::string& model, const std::string& points_file,
                 const std::string& out_file, bool allow_extrapolation) {
  const Interpolant interp = load_interpolant(workdir / model);
  std::ifstream is(workdir / points_file);
  if (!is) throw std::runtime_error("cannot open " + (workdir / points_file).string());
  std::vector<std::string> ids;
  const auto points = read_points_csv(is, &ids);
  const auto mode = allow_extrapolation ? Extrapolation::allow : Extrapolation::error;
  auto os = open_out(workdir / out_file);
  os << "id,f\n";
  for (std::size_t n = 0; n < points.size(); ++n) {
    if (points[n].size() != interp.dim())
      throw std::invalid_argument("point " + ids[n] + " has the wrong dimension");
    os << ids[n] << ',' << format_real(interp.evaluate(points[n], mode)) << '\n';
  }
  return 0;
}

int cmd_expand(const fs::path& workdir, const std::string& model, const std::string& out_file) {
  const Interpolant interp = load_interpolant(workdir / model);
  auto os = open_out(workdir / out_file);
  write_csv(os, legendre_coeffs(interp, interp.range()));
  return 0;
}

int cmd_compare(const fs::path& workdir, const std::string& config, const std::string& schemes) {
  const RunConfig rc = read_run_config(workdir / config);
  const TargetSpec target = rc.make_target(workdir);
  std::vector<std::string> names;
  for (auto& s : split(schemes, ',')) names.push_back(trim(s));
  const auto rows = compare_schemes(rc.adaptive, target, names);
  auto os = open_out(workdir / rc.compare_file);
  write_compare_csv(os, rows);
  write_compare_csv(std::cout, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive sparse-grid interpolation"};
  app.require_subcommand(1);
  std::string workdir;
  app.add_option("--workdir", workdir, "Directory all file arguments are relative to")->required();

  auto* nodes = app.add_subcommand("nodes", "Node sequence and measured Lebesgue constants");
  std::string rule;
  int levels = 0;
  int probes = default_probe_count;
  std::string lambda_file, nodes_file;
  nodes->add_option("--rule", rule, "Node rule")->required();
  nodes->add_option("--levels", levels, "Number of levels (l = 0 .. L-1)")->required()->check(CLI::PositiveNumber);
  nodes->add_option("--probes", probes, "Probe points for the Lebesgue constant")->check(CLI::Range(10000, 100000000));
  nodes->add_option("--lambda-out", lambda_file, "Level table file (default lambda_<rule>.csv)");
  nodes->add_option("--nodes-out", nodes_file, "Node file (default nodes_<rule>.csv)");

  auto* runc = app.add_subcommand("run", "Adaptive run from a config file");
  std::string config;
  bool fresh = false;
  runc->add_option("--config", config, "Config file")->required();
  runc->add_flag("--fresh", fresh, "Ignore an existing checkpoint");

  auto* eval = app.add_subcommand("evaluate", "Evaluate a saved interpolant");
  std::string model, points, out = "evaluations.csv";
  bool extrapolate = false;
  eval->add_option("--model", model, "Interpolant file")->required();
  eval->add_option("--points", points, "Points CSV (id,y_1,...,y_d)")->required();
  eval->add_option("--out", out, "Output CSV (id,f)");
  eval->add_flag("--allow-extrapolation", extrapolate, "Accept points outside [-1,1]^d");

  auto* expand = app.add_subcommand("expand", "Legendre coefficients of a saved interpolant");
  std::string expand_out = "expansion.csv";
  expand->add_option("--model", model, "Interpolant file")->required();
  expand->add_option("--out", expand_out, "Output CSV (nu_1,...,nu_d,c_hat)");

  auto* compare = app.add_subcommand("compare", "Convergence of several schemes on one target");
  std::string schemes = "isotropic,dynamic_td,dynamic_curved";
  compare->add_option("--config", config, "Config file")->required();
  compare->add_option("--schemes", schemes, "Comma-separated scheme list");

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path wd(workdir);
    if (!fs::is_directory(wd)) throw std::runtime_error("workdir does not exist: " + workdir);
    if (*nodes) return cmd_nodes(wd, rule, levels, probes, lambda_file, nodes_file);
    if (*runc) return cmd_run(wd, config, fresh);
    if (*eval) return cmd_evaluate(wd, model, points, out, extrapolate);
    if (*expand) return cmd_expand(wd, model, expand_out);
    if (*compare) return cmd_compare(wd, config, schemes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  }
  return exit_error;
}
