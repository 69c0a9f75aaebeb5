#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "driver.hpp"
#include "multiindex.hpp"
#include "rules1d.hpp"
#include "sparse_grid.hpp"
#include "targets.hpp"

namespace qosg {

using json = nlohmann::json;

inline constexpr int interpolant_format_version = 1;
inline constexpr int checkpoint_format_version = 1;

/// 17 significant digits: parses back to the same double.
inline std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Accepts subnormals, which std::stod rejects as out of range.
inline double parse_real(const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

inline std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_real(part));
  return out;
}

// ---------------------------------------------------------------- point files

/// Reads `id,y_1,...,y_d` (or headerless-id `y_1,...,y_d`) point files.
inline std::vector<Point> read_points_csv(std::istream& is, std::vector<std::string>* ids = nullptr) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("points file is empty");
  const auto header = split(trim(line), ',');
  const bool with_id = !header.empty() && trim(header.front()) == "id";
  std::vector<Point> out;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw std::invalid_argument("points file: row " + std::to_string(row + 1) + " has " +
                                  std::to_string(cells.size()) + " fields, header has " +
                                  std::to_string(header.size()));
    Point p;
    for (std::size_t c = with_id ? 1 : 0; c < cells.size(); ++c) p.push_back(parse_real(cells[c]));
    if (ids) ids->push_back(with_id ? trim(cells.front()) : std::to_string(row));
    out.push_back(std::move(p));
    ++row;
  }
  return out;
}

// ---------------------------------------------------------------- node tables

inline void write_node_levels_csv(std::ostream& os, const NodeSequence& seq) {
  os << "level,m_l,lambda_measured,lambda_model\n";
  for (int l = 0; l < seq.levels(); ++l)
    os << l << ',' << growth(seq.kind, l) << ',' << format_real(seq.lambda_table[l]) << ','
       << format_real(lambda_model(seq.kind, l)) << '\n';
}

inline void write_nodes_csv(std::ostream& os, const NodeSequence& seq) {
  os << "j,y_j\n";
  for (std::size_t j = 0; j < seq.nodes.size(); ++j)
    os << (j + 1) << ',' << format_real(seq.nodes[j]) << '\n';
}

// ---------------------------------------------------------------- history

inline std::string join_dims(const std::set<std::size_t>& dims) {
  std::string out;
  for (std::size_t k : dims) {
    if (!out.empty()) out += ';';
    out += std::to_string(k + 1);
  }
  return out;
}

inline void write_history_csv(std::ostream& os, const std::vector<ConvergenceRecord>& history,
                              std::size_t dim) {
  os << "iter";
  for (std::size_t k = 0; k < dim; ++k) os << ",alpha_" << (k + 1);
  for (std::size_t k = 0; k < dim; ++k) os << ",beta_" << (k + 1);
  os << ",C_hat,residual,n_used,corrected,excluded,probe_error,node_count\n";
  for (const auto& r : history) {
    os << r.iteration;
    for (double a : r.fit.alpha) os << ',' << format_real(a);
    for (double b : r.fit.beta) os << ',' << format_real(b);
    os << ',' << format_real(r.fit.c_hat) << ',' << format_real(r.fit.residual) << ','
       << r.fit.used << ',' << join_dims(r.fit.corrected_dims) << ','
       << join_dims(r.fit.excluded_dims) << ','
       << (r.probe_error ? format_real(*r.probe_error) : std::string()) << ',' << r.node_count
       << '\n';
  }
}

inline void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows) {
  os << "scheme,nodes,error\n";
  for (const auto& r : rows) os << r.scheme << ',' << r.nodes << ',' << format_real(r.error) << '\n';
}

// ---------------------------------------------------------------- JSON

inline json to_json(const MultiIndex& mi) { return json(std::vector<int>(mi.begin(), mi.end())); }

inline MultiIndex multi_index_from_json(const json& j) { return MultiIndex(j.get<std::vector<int>>()); }

inline json to_json(const IndexSet& s) {
  json out = json::array();
  for (const auto& mi : s) out.push_back(to_json(mi));
  return out;
}

inline IndexSet index_set_from_json(const json& j, std::size_t dim) {
  std::vector<MultiIndex> members;
  for (const auto& e : j) members.push_back(multi_index_from_json(e));
  return IndexSet(dim, std::move(members));
}

inline json to_json(const Interpolant& interp) {
  json grid = json::array();
  for (const auto& j : interp.grid()) grid.push_back(to_json(j));
  return json{{"format", "qosg-interpolant"},
              {"version", interpolant_format_version},
              {"dim", interp.dim()},
              {"rule", std::string(to_string(interp.rule()))},
              {"theta", to_json(interp.tensor_set().theta)},
              {"nodes1d", interp.nodes1d()},
              {"grid", grid},
              {"samples", interp.samples()},
              {"surpluses", interp.surpluses()}};
}

inline Interpolant interpolant_from_json(const json& j) {
  if (j.value("format", "") != "qosg-interpolant")
    throw std::invalid_argument("not an interpolant file");
  if (j.at("version").get<int>() != interpolant_format_version)
    throw std::invalid_argument("unsupported interpolant format version " +
                                std::to_string(j.at("version").get<int>()));
  const auto dim = j.at("dim").get<std::size_t>();
  const TensorSet ts{index_set_from_json(j.at("theta"), dim),
                     parse_rule(j.at("rule").get<std::string>())};
  const auto samples = j.at("samples").get<std::vector<double>>();
  const auto surpluses = j.at("surpluses").get<std::vector<double>>();
  const auto& grid = j.at("grid");
  if (grid.size() != samples.size() || grid.size() != surpluses.size())
    throw std::invalid_argument("interpolant file: grid, samples and surpluses differ in length");
  Interpolant::SampleMap s, h;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const MultiIndex idx = multi_index_from_json(grid[n]);
    s.emplace(idx, samples[n]);
    h.emplace(idx, surpluses[n]);
  }
  Interpolant out = Interpolant::restore(ts, j.at("nodes1d").get<std::vector<double>>(), s, h);
  if (out.size() != grid.size()) throw std::invalid_argument("interpolant file: grid does not match theta");
  return out;
}

/// Doubles that may be NaN or infinite travel as strings.
inline json real_to_json(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

inline double real_from_json(const json& j) {
  if (j.is_string()) return parse_real(j.get<std::string>());
  return j.get<double>();
}

inline json to_json(const FitParams& p) {
  return json{{"alpha", p.alpha},
              {"beta", p.beta},
              {"c_hat", real_to_json(p.c_hat)},
              {"residual", real_to_json(p.residual)},
              {"used", p.used},
              {"corrected", std::vector<std::size_t>(p.corrected_dims.begin(), p.corrected_dims.end())},
              {"excluded", std::vector<std::size_t>(p.excluded_dims.begin(), p.excluded_dims.end())}};
}

inline FitParams fit_from_json(const json& j) {
  FitParams p;
  p.alpha = j.at("alpha").get<std::vector<double>>();
  p.beta = j.at("beta").get<std::vector<double>>();
  p.c_hat = real_from_json(j.at("c_hat"));
  p.residual = real_from_json(j.at("residual"));
  p.used = j.at("used").get<std::size_t>();
  for (auto k : j.at("corrected").get<std::vector<std::size_t>>()) p.corrected_dims.insert(k);
  for (auto k : j.at("excluded").get<std::vector<std::size_t>>()) p.excluded_dims.insert(k);
  return p;
}

inline json to_json(const ConvergenceRecord& r) {
  json out{{"iteration", r.iteration},
           {"node_count", r.node_count},
           {"new_node_count", r.new_node_count},
           {"level", real_to_json(r.level)},
           {"fit", to_json(r.fit)},
           {"fitted", r.fitted},
           {"wall_time", r.wall_time}};
  out["probe_error"] = r.probe_error ? json(*r.probe_error) : json(nullptr);
  return out;
}

inline ConvergenceRecord record_from_json(const json& j) {
  ConvergenceRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.node_count = j.at("node_count").get<std::size_t>();
  r.new_node_count = j.at("new_node_count").get<std::size_t>();
  r.level = real_from_json(j.at("level"));
  r.fit = fit_from_json(j.at("fit"));
  r.fitted = j.at("fitted").get<bool>();
  r.wall_time = j.at("wall_time").get<double>();
  if (!j.at("probe_error").is_null()) r.probe_error = j.at("probe_error").get<double>();
  return r;
}

inline json to_json(const AdaptiveState& s, const AdaptiveConfig& cfg) {
  json cache_points = json::array();
  json cache_values = json::array();
  for (const auto& [key, v] : s.cache) {
    std::vector<double> y(key.size());
    for (std::size_t k = 0; k < key.size(); ++k) y[k] = std::bit_cast<double>(key[k]);
    cache_points.push_back(y);
    cache_values.push_back(v);
  }
  json history = json::array();
  for (const auto& r : s.history) history.push_back(to_json(r));
  json out{{"format", "qosg-checkpoint"},
           {"version", checkpoint_format_version},
           {"dim", cfg.dim},
           {"rule", std::string(to_string(cfg.rule))},
           {"iteration", s.iteration},
           {"fit", to_json(s.fit)},
           {"history", history},
           {"cache_points", cache_points},
           {"cache_values", cache_values},
           {"probe_values", s.probe_values}};
  out["interpolant"] = s.started() ? to_json(s.interp) : json(nullptr);
  return out;
}

inline AdaptiveState state_from_json(const json& j, const AdaptiveConfig& cfg) {
  if (j.value("format", "") != "qosg-checkpoint") throw std::invalid_argument("not a checkpoint file");
  if (j.at("version").get<int>() != checkpoint_format_version)
    throw std::invalid_argument("unsupported checkpoint format version");
  if (j.at("dim").get<std::size_t>() != cfg.dim ||
      parse_rule(j.at("rule").get<std::string>()) != cfg.rule)
    throw std::invalid_argument("checkpoint does not match the configured rule and dimension");
  AdaptiveState s;
  s.iteration = j.at("iteration").get<int>();
  if (!j.at("fit").at("alpha").empty()) s.fit = fit_from_json(j.at("fit"));
  for (const auto& r : j.at("history")) s.history.push_back(record_from_json(r));
  const auto& points = j.at("cache_points");
  const auto& values = j.at("cache_values");
  if (points.size() != values.size()) throw std::invalid_argument("checkpoint: corrupt sample cache");
  for (std::size_t n = 0; n < points.size(); ++n)
    s.cache.emplace(node_key(points[n].get<std::vector<double>>()), values[n].get<double>());
  s.probe_values = j.at("probe_values").get<std::vector<double>>();
  if (!j.at("interpolant").is_null()) {
    s.interp = interpolant_from_json(j.at("interpolant"));
    s.theta = s.interp.tensor_set();
  }
  if (s.started() != !j.at("interpolant").is_null())
    throw std::invalid_argument("checkpoint: history and interpolant disagree");
  return s;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return json::parse(is);
}

/// Writes via a temporary file and rename so a crash never leaves a torn file.
inline void write_json_file(const std::filesystem::path& path, const json& j) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << j.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

inline void save_interpolant(const std::filesystem::path& path, const Interpolant& interp) {
  write_json_file(path, to_json(interp));
}

inline Interpolant load_interpolant(const std::filesystem::path& path) {
  return interpolant_from_json(read_json_file(path));
}

// ---------------------------------------------------------------- run config

/// Everything a `run` or `compare` needs, parsed from a flat key = value file.
struct RunConfig {
  AdaptiveConfig adaptive;
  std::string target = "rational";
  std::map<std::string, std::vector<double>> target_params;
  std::string external_command;
  double external_timeout = 86400.0;  ///< seconds
  double external_poll = 0.2;         ///< seconds
  std::string history_file = "history.csv";
  std::string checkpoint_file = "checkpoint.json";
  std::string interpolant_file = "interpolant.json";
  std::string compare_file = "compare.csv";
  bool resume = true;

  [[nodiscard]] TargetSpec make_target(const std::filesystem::path& workdir) const {
    if (target == "external") {
      ExternalEvaluator ev;
      ev.workdir = workdir;
      ev.command = external_command;
      ev.timeout = std::chrono::milliseconds(static_cast<long long>(external_timeout * 1000.0));
      ev.poll = std::chrono::milliseconds(static_cast<long long>(external_poll * 1000.0));
      return external_target(adaptive.dim, ev);
    }
    return builtin_target(target, adaptive.dim, target_params);
  }
};

namespace detail {

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("not a boolean: '" + v + "'");
}

inline std::size_t parse_count(const std::string& v) {
  const double x = parse_real(v);
  if (x < 0 || x != std::floor(x)) throw std::invalid_argument("not a count: '" + v + "'");
  return static_cast<std::size_t>(x);
}

}  // namespace detail

/// Keys:
///   rule, dim, target, target.<param>, external_command, external_timeout,
///   external_poll, initial (auto | curved | tensor | total_degree |
///   hyperbolic | smolyak), initial_alpha, initial_beta, initial_level,
///   fit_source (legendre | surplus), fit_model (curved | total_degree |
///   fixed), batch (minimal | N), max_iterations, max_samples, probe_count
///   (0 disables), probe_seed, min_magnitude, history_file,
///   checkpoint_file, interpolant_file, compare_file, resume.
inline RunConfig parse_run_config(std::istream& is) {
  RunConfig rc;
  auto& a = rc.adaptive;
  int probe_count = 1000;
  std::uint64_t probe_seed = 0;
  std::string line;
  int lineno = 0;
  std::string initial = "auto";
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "rule") a.rule = parse_rule(value);
      else if (key == "dim") a.dim = detail::parse_count(value);
      else if (key == "target") rc.target = value;
      else if (key.rfind("target.", 0) == 0) rc.target_params[key.substr(7)] = parse_reals(value);
      else if (key == "external_command") rc.external_command = value;
      else if (key == "external_timeout") rc.external_timeout = parse_real(value);
      else if (key == "external_poll") rc.external_poll = parse_real(value);
      else if (key == "initial") initial = value;
      else if (key == "initial_alpha") a.initial.alpha = parse_reals(value);
      else if (key == "initial_beta") a.initial.beta = parse_reals(value);
      else if (key == "initial_level") a.initial.level = parse_real(value);
      else if (key == "fit_source") a.fit_source = parse_fit_source(value);
      else if (key == "fit_model") a.model = parse_fit_model(value);
      else if (key == "batch") a.target_new_nodes = value == "minimal" ? 0 : detail::parse_count(value);
      else if (key == "max_iterations") a.max_iterations = static_cast<int>(detail::parse_count(value));
      else if (key == "max_samples") a.max_samples = detail::parse_count(value);
      else if (key == "probe_count") probe_count = static_cast<int>(detail::parse_count(value));
      else if (key == "probe_seed") probe_seed = std::stoull(value);
      else if (key == "min_magnitude") a.min_magnitude = parse_real(value);
      else if (key == "history_file") rc.history_file = value;
      else if (key == "checkpoint_file") rc.checkpoint_file = value;
      else if (key == "interpolant_file") rc.interpolant_file = value;
      else if (key == "compare_file") rc.compare_file = value;
      else if (key == "resume") rc.resume = detail::parse_bool(value);
      else throw std::invalid_argument("unknown key");
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    }
  }
  if (initial == "auto") {
    a.initial.kind = InitialSet::Kind::automatic;
  } else if (initial == "curved") {
    a.initial.kind = InitialSet::Kind::curved;
    if (a.initial.beta.empty()) a.initial.beta.assign(a.dim, 0.0);
  } else {
    a.initial.kind = InitialSet::Kind::classic;
    a.initial.classic = parse_classic_kind(initial);
  }
  if (a.initial.kind != InitialSet::Kind::automatic && a.initial.alpha.empty())
    a.initial.alpha.assign(a.dim, 1.0);
  if (probe_count > 0) a.probe = ErrorProbe{probe_count, probe_seed};
  a.validate();
  return rc;
}

inline RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  return parse_run_config(is);
}

}  // namespace qosg
