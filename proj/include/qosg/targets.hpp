#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spectral.hpp"

namespace qosg {

using Point = std::vector<double>;

/// A batch evaluation failed. `failed` lists the offending point ids
/// (positions in the batch); values that did come back are in `partial`.
struct EvaluationError : std::runtime_error {
  std::vector<std::size_t> failed;
  std::map<std::size_t, double> partial;

  EvaluationError(const std::string& what, std::vector<std::size_t> failed_ids,
                  std::map<std::size_t, double> partial_values = {})
      : std::runtime_error(what), failed(std::move(failed_ids)), partial(std::move(partial_values)) {}
};

/// File-polling evaluator: writes points.csv into the work directory, then
/// either runs a command there or waits for a `done` sentinel, and reads values.csv.
struct ExternalEvaluator {
  std::filesystem::path workdir;
  std::string command;                               ///< empty: wait for an outside process
  std::chrono::milliseconds timeout{std::chrono::hours(24)};
  std::chrono::milliseconds poll{std::chrono::milliseconds(200)};

  [[nodiscard]] std::vector<double> evaluate(const std::vector<Point>& points) const {
    namespace fs = std::filesystem;
    if (points.empty()) return {};
    const fs::path pts = workdir / "points.csv";
    const fs::path vals = workdir / "values.csv";
    const fs::path done = workdir / "done";
    fs::create_directories(workdir);
    fs::remove(vals);
    fs::remove(done);
    {
      std::ofstream os(pts);
      if (!os) throw std::runtime_error("external evaluator: cannot write " + pts.string());
      os << "id";
      for (std::size_t k = 0; k < points.front().size(); ++k) os << ",y_" << (k + 1);
      os << '\n' << std::setprecision(17);
      for (std::size_t id = 0; id < points.size(); ++id) {
        os << id;
        for (double v : points[id]) os << ',' << v;
        os << '\n';
      }
    }
    if (!command.empty()) {
      const std::string cmd = "cd \"" + workdir.string() + "\" && " + command;
      if (int rc = std::system(cmd.c_str()); rc != 0)
        throw EvaluationError("external evaluator: command exited with status " + std::to_string(rc),
                              all_ids(points.size()));
      if (!fs::exists(vals))
        throw EvaluationError("external evaluator: command produced no values.csv",
                              all_ids(points.size()));
    } else {
      const auto deadline = std::chrono::steady_clock::now() + timeout;
      while (!fs::exists(done)) {
        if (std::chrono::steady_clock::now() > deadline)
          throw EvaluationError("external evaluator: timed out waiting for " + done.string(),
                                all_ids(points.size()));
        std::this_thread::sleep_for(poll);
      }
    }
    return read_values(vals, points.size());
  }

 private:
  static std::vector<std::size_t> all_ids(std::size_t n) {
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = i;
    return ids;
  }

  static std::vector<double> read_values(const std::filesystem::path& file, std::size_t n) {
    std::ifstream is(file);
    if (!is) throw EvaluationError("external evaluator: cannot read " + file.string(), all_ids(n));
    std::string line;
    std::getline(is, line);
    if (line.rfind("id,f", 0) != 0)
      throw EvaluationError("external evaluator: values.csv must start with header id,f",
                            all_ids(n));
    std::map<std::size_t, double> got;
    while (std::getline(is, line)) {
      if (line.empty() || line == "\r") continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos)
        throw EvaluationError("external evaluator: malformed row '" + line + "'", all_ids(n));
      const std::size_t id = std::stoul(line.substr(0, comma));
      const std::string cell = line.substr(comma + 1);
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\r')) ++end;
      if (end == cell.c_str() || *end != '\0') v = std::numeric_limits<double>::quiet_NaN();
      got[id] = v;
    }
    std::vector<std::size_t> bad;
    std::map<std::size_t, double> good;
    std::vector<double> out(n);
    for (std::size_t id = 0; id < n; ++id) {
      auto it = got.find(id);
      if (it == got.end() || !std::isfinite(it->second)) {
        bad.push_back(id);
      } else {
        out[id] = it->second;
        good.emplace(id, it->second);
      }
    }
    if (!bad.empty()) {
      std::ostringstream msg;
      msg << "external evaluator: missing or non-finite values for ids";
      for (std::size_t id : bad) msg << ' ' << id;
      throw EvaluationError(msg.str(), std::move(bad), std::move(good));
    }
    return out;
  }
};

/// A target function on [-1,1]^d: either a built-in analytic function or an
/// external evaluator. `analyticity_rho` holds the per-axis Bernstein
/// ellipse parameters when known (infinity for entire functions).
struct TargetSpec {
  std::string name;
  std::size_t dim = 1;
  std::map<std::string, std::vector<double>> params;
  std::optional<std::vector<double>> analyticity_rho;
  std::function<double(std::span<const double>)> function;
  std::optional<ExternalEvaluator> external;

  [[nodiscard]] bool is_external() const noexcept { return external.has_value(); }

  /// Evaluates a batch; throws EvaluationError on any non-finite value.
  [[nodiscard]] std::vector<double> evaluate(const std::vector<Point>& points) const {
    if (external) return external->evaluate(points);
    std::vector<double> out(points.size());
    std::vector<std::size_t> bad;
    std::map<std::size_t, double> good;
    for (std::size_t i = 0; i < points.size(); ++i) {
      out[i] = function(points[i]);
      if (!std::isfinite(out[i]))
        bad.push_back(i);
      else
        good.emplace(i, out[i]);
    }
    if (!bad.empty())
      throw EvaluationError("target '" + name + "' returned a non-finite value", std::move(bad),
                            std::move(good));
    return out;
  }

  [[nodiscard]] double operator()(std::span<const double> y) const {
    if (function) return function(y);
    return evaluate({Point(y.begin(), y.end())}).front();
  }
};

namespace detail {

inline std::vector<double> param_or(const std::map<std::string, std::vector<double>>& p,
                                    const std::string& key, std::vector<double> fallback) {
  auto it = p.find(key);
  return it == p.end() ? std::move(fallback) : it->second;
}

inline void require_length(const std::vector<double>& v, std::size_t d, const std::string& what) {
  if (v.size() != d)
    throw std::invalid_argument(what + " must have " + std::to_string(d) + " entries");
}

/// Bernstein ellipse parameter for a real singularity at distance |y*| > 1.
inline double rho_of_singularity(double y_star) {
  const double a = std::abs(y_star);
  return a + std::sqrt(a * a - 1.0);
}

}  // namespace detail

/// Built-in targets:
///   rational       1 / (c0 + sum c_k y_k), requires c0 > sum |c_k|
///   expsum         exp(-sum c_k y_k)
///   gaussian_peak  exp(-sum c_k (y_k - t_k)^2)
///   legendre_mode  orthonormal Legendre polynomial L_nu (params "nu")
inline TargetSpec builtin_target(const std::string& name, std::size_t dim,
                                 const std::map<std::string, std::vector<double>>& params = {}) {
  if (dim == 0) throw std::invalid_argument("target dimension must be >= 1");
  TargetSpec spec{name, dim, params, std::nullopt, {}, std::nullopt};
  const double inf = std::numeric_limits<double>::infinity();

  if (name == "rational") {
    const double c0 = detail::param_or(params, "c0", {2.0 * dim}).at(0);
    auto c = detail::param_or(params, "c", std::vector<double>(dim, 1.0));
    detail::require_length(c, dim, "rational: c");
    double total = 0.0;
    for (double v : c) total += std::abs(v);
    if (!(c0 > total)) throw std::invalid_argument("rational: need c0 > sum |c_k|");
    // Restricting to axis k with the other coordinates at their worst corner
    // puts the nearest real singularity at |y*| = (c0 - sum_{j!=k} |c_j|) / |c_k|.
    std::vector<double> rho(dim, inf);
    for (std::size_t k = 0; k < dim; ++k)
      if (c[k] != 0.0) rho[k] = detail::rho_of_singularity((c0 - (total - std::abs(c[k]))) / std::abs(c[k]));
    spec.analyticity_rho = rho;
    spec.params["c0"] = {c0};
    spec.params["c"] = c;
    spec.function = [c0, c](std::span<const double> y) {
      double s = c0;
      for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * y[k];
      return 1.0 / s;
    };
  } else if (name == "expsum") {
    auto c = detail::param_or(params, "c", std::vector<double>(dim, 1.0));
    detail::require_length(c, dim, "expsum: c");
    spec.analyticity_rho = std::vector<double>(dim, inf);
    spec.params["c"] = c;
    spec.function = [c](std::span<const double> y) {
      double s = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * y[k];
      return std::exp(-s);
    };
  } else if (name == "gaussian_peak") {
    auto c = detail::param_or(params, "c", std::vector<double>(dim, 1.0));
    auto t = detail::param_or(params, "t", std::vector<double>(dim, 0.0));
    detail::require_length(c, dim, "gaussian_peak: c");
    detail::require_length(t, dim, "gaussian_peak: t");
    spec.analyticity_rho = std::vector<double>(dim, inf);
    spec.params["c"] = c;
    spec.params["t"] = t;
    spec.function = [c, t](std::span<const double> y) {
      double s = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * (y[k] - t[k]) * (y[k] - t[k]);
      return std::exp(-s);
    };
  } else if (name == "legendre_mode") {
    auto nu = detail::param_or(params, "nu", std::vector<double>(dim, 1.0));
    detail::require_length(nu, dim, "legendre_mode: nu");
    std::vector<int> degrees(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      if (nu[k] < 0 || nu[k] != std::floor(nu[k]))
        throw std::invalid_argument("legendre_mode: nu must be non-negative integers");
      degrees[k] = static_cast<int>(nu[k]);
    }
    spec.analyticity_rho = std::vector<double>(dim, inf);
    spec.params["nu"] = nu;
    spec.function = [degrees](std::span<const double> y) {
      double v = 1.0;
      for (std::size_t k = 0; k < degrees.size(); ++k) v *= legendre_1d(degrees[k], y[k]);
      return v;
    };
  } else {
    throw std::invalid_argument("unknown builtin target: " + name);
  }
  return spec;
}

inline TargetSpec external_target(std::size_t dim, ExternalEvaluator evaluator) {
  TargetSpec spec;
  spec.name = "external";
  spec.dim = dim;
  spec.external = std::move(evaluator);
  return spec;
}

}  // namespace qosg
