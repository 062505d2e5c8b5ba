#ifndef MINREG_CONFIG_HPP
#define MINREG_CONFIG_HPP

#include "minreg/scanner.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace minreg {

/// A parsed problem file. Layout (JSON):
///
///   {
///     "known_function": {
///       "terms": [ {"Q": [[1,0],[0,1]], "m": [2,0], "weight": 1} ],
///       "kinks": [ {"point": [0,0], "generators": [[1,0],[-1,0]]} ]
///     },
///     "uncertainty": {"type": "ball", "center": [0,0], "radius": 0.1},
///     "sigma": 2.0,
///     "grid": {"lower": [-1,-2], "upper": [3,2], "counts": [401,401]},
///     "theta_steps": 2048,
///     "slack": 1e-9
///   }
///
/// "Q" may be nested rows or a flat row-major list of n*n numbers; omitted Q
/// means the identity. "uncertainty" may instead be
/// {"type": "points", "points": [[...], ...]}.
struct ProblemConfig {
  KnownFunction known_function;
  UncertaintySet uncertainty;
  std::optional<GridSpec> grid;
  EvalOptions options;
  nlohmann::json source;
};

namespace detail {

class ConfigReader {
 public:
  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::Config, path + ": " + msg);
  }

  static const nlohmann::json& field(const nlohmann::json& obj, const std::string& path,
                                     const char* key) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing field");
    return *it;
  }

  static double number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
  }

  static std::size_t count(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
    return j.get<std::size_t>();
  }

  static Vector vector(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = number(j[i], path + "[" + std::to_string(i) + "]");
    }
    return v;
  }

  static Matrix matrix(const nlohmann::json& j, const std::string& path, Eigen::Index n) {
    if (!j.is_array() || j.empty()) fail(path, "expected a matrix");
    Matrix q(n, n);
    if (j.front().is_array()) {
      if (static_cast<Eigen::Index>(j.size()) != n) fail(path, "expected " + std::to_string(n) + " rows");
      for (Eigen::Index r = 0; r < n; ++r) {
        const std::string row_path = path + "[" + std::to_string(r) + "]";
        const Vector row = vector(j[static_cast<std::size_t>(r)], row_path);
        if (row.size() != n) fail(row_path, "expected " + std::to_string(n) + " columns");
        q.row(r) = row.transpose();
      }
    } else {
      const Vector flat = vector(j, path);
      if (flat.size() != n * n) fail(path, "expected " + std::to_string(n * n) + " row-major entries");
      for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) q(r, c) = flat[r * n + c];
      }
    }
    return q;
  }

  template <class F>
  static auto guarded(const std::string& path, F&& make) {
    try {
      return make();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Config) throw;
      fail(path, e.message());
    }
  }

  static KnownFunction known_function(const nlohmann::json& j, const std::string& path) {
    const auto& terms_json = field(j, path, "terms");
    if (!terms_json.is_array() || terms_json.empty()) fail(path + ".terms", "expected a nonempty array");
    std::vector<QuadraticTerm> terms;
    for (std::size_t i = 0; i < terms_json.size(); ++i) {
      const std::string tp = path + ".terms[" + std::to_string(i) + "]";
      const auto& t = terms_json[i];
      const Vector m = vector(field(t, tp, "m"), tp + ".m");
      const Matrix q = t.contains("Q") ? matrix(t["Q"], tp + ".Q", m.size())
                                       : Matrix(Matrix::Identity(m.size(), m.size()));
      const double w = t.contains("weight") ? number(t["weight"], tp + ".weight") : 1.0;
      terms.push_back(guarded(tp, [&] { return QuadraticTerm(q, m, w); }));
    }
    std::vector<KinkSet> kinks;
    if (j.contains("kinks")) {
      const auto& ks = j["kinks"];
      if (!ks.is_array()) fail(path + ".kinks", "expected an array");
      for (std::size_t i = 0; i < ks.size(); ++i) {
        const std::string kp = path + ".kinks[" + std::to_string(i) + "]";
        KinkSet k{vector(field(ks[i], kp, "point"), kp + ".point"), {}};
        const auto& gens = field(ks[i], kp, "generators");
        if (!gens.is_array() || gens.empty()) fail(kp + ".generators", "expected a nonempty array");
        for (std::size_t g = 0; g < gens.size(); ++g) {
          k.generators.push_back(vector(gens[g], kp + ".generators[" + std::to_string(g) + "]"));
        }
        kinks.push_back(std::move(k));
      }
    }
    return guarded(path, [&] { return KnownFunction(std::move(terms), std::move(kinks)); });
  }

  static UncertaintySet uncertainty(const nlohmann::json& j, const std::string& path, double sigma) {
    const auto& type = field(j, path, "type");
    if (!type.is_string()) fail(path + ".type", "expected \"ball\" or \"points\"");
    const auto kind = type.get<std::string>();
    if (kind == "ball") {
      const Vector center = vector(field(j, path, "center"), path + ".center");
      const double radius = number(field(j, path, "radius"), path + ".radius");
      if (!(radius > 0.0)) fail(path + ".radius", "must be > 0");
      return UncertaintySet(Ball(center, radius), sigma);
    }
    if (kind == "points") {
      const auto& pts = field(j, path, "points");
      if (!pts.is_array() || pts.empty()) fail(path + ".points", "expected a nonempty array");
      std::vector<Vector> points;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        points.push_back(vector(pts[i], path + ".points[" + std::to_string(i) + "]"));
      }
      return guarded(path + ".points", [&] { return UncertaintySet(PointSet(std::move(points)), sigma); });
    }
    fail(path + ".type", "unknown uncertainty type '" + kind + "'");
  }

  static GridSpec grid(const nlohmann::json& j, const std::string& path) {
    GridSpec g;
    g.lower = vector(field(j, path, "lower"), path + ".lower");
    g.upper = vector(field(j, path, "upper"), path + ".upper");
    const auto& counts = field(j, path, "counts");
    if (!counts.is_array()) fail(path + ".counts", "expected an array of integers");
    for (std::size_t i = 0; i < counts.size(); ++i) {
      g.counts.push_back(count(counts[i], path + ".counts[" + std::to_string(i) + "]"));
    }
    guarded(path, [&] {
      g.validate();
      return 0;
    });
    return g;
  }
};

inline std::string describe_parse_error(const std::string& text, const nlohmann::json::parse_error& e) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + e.what();
}

}  // namespace detail

inline ProblemConfig parse_config(const std::string& text) {
  using R = detail::ConfigReader;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Config, detail::describe_parse_error(text, e));
  }
  if (!j.is_object()) R::fail("<root>", "expected an object");
  const double sigma = R::number(R::field(j, "", "sigma"), "sigma");
  if (!(sigma > 0.0)) R::fail("sigma", "must be > 0");
  KnownFunction f = R::known_function(R::field(j, "", "known_function"), "known_function");
  UncertaintySet set = R::uncertainty(R::field(j, "", "uncertainty"), "uncertainty", sigma);
  if (set.dimension() != f.dimension()) {
    R::fail("uncertainty", "dimension " + std::to_string(set.dimension()) +
                               " differs from known_function dimension " +
                               std::to_string(f.dimension()));
  }
  std::optional<GridSpec> grid;
  if (j.contains("grid")) {
    grid = R::grid(j["grid"], "grid");
    if (grid->dimension() != f.dimension()) R::fail("grid", "dimension differs from known_function");
  }
  EvalOptions options;
  if (j.contains("theta_steps")) {
    options.theta_steps = R::count(j["theta_steps"], "theta_steps");
    if (options.theta_steps < 2) R::fail("theta_steps", "must be >= 2");
  }
  if (j.contains("slack")) {
    options.slack = R::number(j["slack"], "slack");
    if (options.slack < 0.0) R::fail("slack", "must be >= 0");
  }
  return ProblemConfig{std::move(f), std::move(set), std::move(grid), options, std::move(j)};
}

inline ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, path + ": " + e.message());
  }
}

}  // namespace minreg

#endif  // MINREG_CONFIG_HPP
