#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "wulffkit/wulffkit.hpp"

namespace wulffkit::scenario {

using json = nlohmann::json;

inline constexpr const char* kReportHeader = "# wulffkit-report v1";
inline constexpr const char* kReportColumns = "name,surface,norm,s,r,lhs,rhs,residual,tolerance,pass";

enum class Status { Pass, Fail, Info, Error };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Info: return "info";
    case Status::Error: return "error";
  }
  return "error";
}

/// One CSV row. `s` and `r` are NaN for checks without radii.
struct Row {
  std::string name;
  std::string surface;
  std::string norm;
  double s = std::numeric_limits<double>::quiet_NaN();
  double r = std::numeric_limits<double>::quiet_NaN();
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  Status status = Status::Fail;
  std::string note;
};

struct Artifact {
  std::string filename;
  std::string content;
};

struct CheckOutcome {
  std::string kind;
  std::string label;
  std::vector<Row> rows;
  std::vector<Artifact> artifacts;
};

struct NormDecl {
  std::string id;
  int dim = 3;
  json spec;
};

struct SurfaceDecl {
  std::string id;
  int n = 2;
  json spec;
};

struct CheckDecl {
  std::string kind;
  std::string label;
  json spec;
};

struct Overrides {
  std::optional<int> quad_order;
  std::optional<int> grid;
  std::optional<int> max_depth;
  std::optional<std::uint64_t> seed;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  ParamQuadrature rule{};
  int max_depth = -1;
  std::string output_dir;
  std::map<std::string, NormDecl> norms;
  std::map<std::string, SurfaceDecl> surfaces;
  std::vector<CheckDecl> checks;
};

struct ListEntry {
  std::string name;
  std::string params;
};

inline const std::vector<ListEntry>& norm_families() {
  static const std::vector<ListEntry> v = {
      {"euclidean", "dim"},
      {"quadratic", "dim, matrix (dim*dim entries, row-major, symmetric positive-definite)"},
      {"quartic-regularized", "dim, eps > 0"},
  };
  return v;
}

inline const std::vector<ListEntry>& surface_types() {
  static const std::vector<ListEntry> v = {
      {"hyperplane", "origin[3], normal[3], half_width"},
      {"sphere", "radius"},
      {"ellipsoid", "axes[3]"},
      {"catenoid", "half_height, scale"},
      {"transformed-catenoid", "matrix[9], half_height"},
      {"line", "origin[2], direction[2], half_length"},
      {"circle", "radius"},
      {"graph", "n (1|2); n=1: coefficients[] of a polynomial in t, lo, hi; "
                "n=2: coefficients[6] of c + cx x + cy y + cxx x^2 + cxy xy + cyy y^2, x[2], y[2]"},
      {"enneper", "scale, half_width"},
  };
  return v;
}

inline const std::vector<ListEntry>& check_kinds() {
  static const std::vector<ListEntry> v = {
      {"norm-identities", "norm, directions=1000, seed"},
      {"condition-s", "norm, samples=10000, eps=1e-8, delta=1e-6, keep=10, expect=pass|violation, search=false, seed"},
      {"lemmas", "surface, xi, grid=9, tolerance=1e-4"},
      {"monotonicity", "norm, surface, s, r, radii=auto|[...]|none, count=8"},
      {"equiaffine", "surface, xi, gauge, s, r, pointwise=true, grid=9"},
      {"corollary", "norm, surface, expect=bound|equality|strict, rel_tol=1e-4"},
      {"minkowski", "surface, xi, k (integer or list)"},
      {"symfunc", "matrices=100, max_n=4, max_k=3, trace_max_n=5, seed"},
  };
  return v;
}

/// xi: "normal" | {"type": "normal"} | {"type": "anisotropic", "norm": id} |
/// {"type": "constant", "vector": [...]}.
/// gauge: "euclidean" | {"type": "euclidean"} | {"type": "dual" | "norm", "norm": id}.
inline std::string list_text() {
  std::ostringstream os;
  os << "norm families:\n";
  for (const auto& e : norm_families()) os << "  " << e.name << "  (" << e.params << ")\n";
  os << "surfaces:\n";
  for (const auto& e : surface_types()) os << "  " << e.name << "  (" << e.params << ")\n";
  os << "checks:\n";
  for (const auto& e : check_kinds()) os << "  " << e.name << "  (" << e.params << ")\n";
  os << "transversal fields (xi): normal | {type: anisotropic, norm} | {type: constant, vector}\n";
  os << "gauges: euclidean | {type: dual, norm} | {type: norm, norm}\n";
  return os.str();
}

namespace detail {

[[noreturn]] inline void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Config, where + ": " + what);
}

inline std::string fmt(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", x);
  return buf;
}

inline double get_number(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) config_error(where, std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

inline double require_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) config_error(where, std::string("missing '") + key + "'");
  return get_number(j, key, 0.0, where);
}

inline int get_int(const json& j, const char* key, int fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) config_error(where, std::string("'") + key + "' must be an integer");
  return j.at(key).get<int>();
}

inline std::string get_string(const json& j, const char* key, const std::string& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) config_error(where, std::string("'") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

inline bool get_bool(const json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) config_error(where, std::string("'") + key + "' must be true or false");
  return j.at(key).get<bool>();
}

inline std::vector<double> get_numbers(const json& j, const char* key, std::size_t count, const std::string& where) {
  if (!j.contains(key)) config_error(where, std::string("missing '") + key + "'");
  const json& a = j.at(key);
  if (!a.is_array() || (count != 0 && a.size() != count)) {
    config_error(where, std::string("'") + key + "' must be an array of " +
                            (count ? std::to_string(count) + " numbers" : std::string("numbers")));
  }
  std::vector<double> out;
  for (const auto& x : a) {
    if (!x.is_number()) config_error(where, std::string("'") + key + "' must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

template <int D>
Vec<D> get_vec(const json& j, const char* key, const std::string& where) {
  const auto v = get_numbers(j, key, D, where);
  Vec<D> out;
  for (int i = 0; i < D; ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

template <int D>
Mat<D> get_mat(const json& j, const char* key, const std::string& where) {
  const auto v = get_numbers(j, key, D * D, where);
  Mat<D> out;
  for (int i = 0; i < D; ++i)
    for (int k = 0; k < D; ++k) out(i, k) = v[static_cast<std::size_t>(i * D + k)];
  return out;
}

inline std::uint64_t mix_seed(std::uint64_t base, std::size_t index) { return base * 1000003ULL + index; }

}  // namespace detail

template <int D>
MinkowskiNorm<D> make_norm(const NormDecl& decl) {
  const std::string where = "norm '" + decl.id + "'";
  const std::string family = detail::get_string(decl.spec, "family", "", where);
  MinkowskiNorm<D> norm = [&] {
    if (family == "euclidean") return MinkowskiNorm<D>::euclidean();
    if (family == "quadratic") {
      try {
        return MinkowskiNorm<D>::quadratic(detail::get_mat<D>(decl.spec, "matrix", where));
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        detail::config_error(where, e.what());
      }
    }
    if (family == "quartic-regularized") {
      const double eps = detail::require_number(decl.spec, "eps", where);
      if (!(eps > 0.0)) detail::config_error(where, "'eps' must be positive");
      return MinkowskiNorm<D>::quartic_regularized(eps);
    }
    detail::config_error(where, "unknown family '" + family + "'");
  }();
  if (detail::get_bool(decl.spec, "finite_difference", false, where)) {
    const MinkowskiNorm<D> inner = norm;
    norm = MinkowskiNorm<D>::custom(inner.name() + "-fd", [inner](const Vec<D>& u) { return inner.eval(u); });
  }
  return norm;
}

template <int N>
ParametricPatch<N> make_surface(const SurfaceDecl& decl) {
  constexpr int D = N + 1;
  const std::string where = "surface '" + decl.id + "'";
  const json& j = decl.spec;
  const std::string type = detail::get_string(j, "type", "", where);
  auto positive = [&](const char* key, double fallback) {
    const double v = detail::get_number(j, key, fallback, where);
    if (!(v > 0.0)) detail::config_error(where, std::string("'") + key + "' must be positive");
    return v;
  };
  auto build = [&]() -> ParametricPatch<N> {
    if constexpr (N == 1) {
      if (type == "line") {
        const Vec<2> dir = detail::get_vec<2>(j, "direction", where);
        if (dir.norm() < kZeroFloor) detail::config_error(where, "'direction' must be nonzero");
        return surfaces::line(detail::get_vec<2>(j, "origin", where), dir, positive("half_length", 1.0));
      }
      if (type == "circle") return surfaces::circle(positive("radius", 1.0));
      if (type == "graph") {
        const auto c = detail::get_numbers(j, "coefficients", 0, where);
        const double lo = detail::require_number(j, "lo", where), hi = detail::require_number(j, "hi", where);
        if (!(lo < hi)) detail::config_error(where, "'lo' must be below 'hi'");
        return surfaces::graph_curve(
            [c](double t) {
              std::array<double, 3> v{0.0, 0.0, 0.0};
              for (std::size_t k = c.size(); k-- > 0;) {
                v[2] = v[2] * t + 2.0 * v[1];
                v[1] = v[1] * t + v[0];
                v[0] = v[0] * t + c[k];
              }
              return v;
            },
            lo, hi);
      }
    } else {
      if (type == "hyperplane") {
        const Vec<3> nu = detail::get_vec<3>(j, "normal", where);
        if (nu.norm() < kZeroFloor) detail::config_error(where, "'normal' must be nonzero");
        return surfaces::hyperplane(j.contains("origin") ? detail::get_vec<3>(j, "origin", where) : Vec<3>::Zero(), nu,
                                    positive("half_width", 1.0));
      }
      if (type == "sphere") return surfaces::sphere(positive("radius", 1.0));
      if (type == "ellipsoid") {
        const Vec<3> ax = detail::get_vec<3>(j, "axes", where);
        if (!(ax.minCoeff() > 0.0)) detail::config_error(where, "'axes' must be positive");
        return surfaces::ellipsoid(ax[0], ax[1], ax[2]);
      }
      if (type == "catenoid") return surfaces::catenoid(positive("half_height", 1.0), positive("scale", 1.0));
      if (type == "transformed-catenoid") {
        try {
          return surfaces::transformed_catenoid(detail::get_mat<3>(j, "matrix", where), positive("half_height", 1.0));
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::Config) throw;
          detail::config_error(where, e.what());
        }
      }
      if (type == "graph") {
        const auto c = detail::get_numbers(j, "coefficients", 6, where);
        const auto x = detail::get_numbers(j, "x", 2, where);
        const auto y = detail::get_numbers(j, "y", 2, where);
        if (!(x[0] < x[1] && y[0] < y[1])) detail::config_error(where, "'x' and 'y' ranges must be increasing");
        return surfaces::graph_surface(
            [c](double u, double v) {
              surfaces::GraphJet g;
              g.value = c[0] + c[1] * u + c[2] * v + c[3] * u * u + c[4] * u * v + c[5] * v * v;
              g.grad = Eigen::Vector2d(c[1] + 2 * c[3] * u + c[4] * v, c[2] + c[4] * u + 2 * c[5] * v);
              g.hess << 2 * c[3], c[4], c[4], 2 * c[5];
              return g;
            },
            x[0], x[1], y[0], y[1]);
      }
      if (type == "enneper") return surfaces::enneper(positive("scale", 1.0), positive("half_width", 1.0));
    }
    detail::config_error(where, "unknown surface type '" + type + "' for n = " + std::to_string(N));
  };
  ParametricPatch<N> patch = build();
  if (j.contains("transform")) {
    const json& t = j.at("transform");
    const Mat<D> lin = detail::get_mat<D>(t, "matrix", where + " transform");
    if (std::abs(lin.determinant()) < 1e-12) detail::config_error(where, "transform matrix is singular");
    const Vec<D> shift = t.contains("shift") ? detail::get_vec<D>(t, "shift", where + " transform") : Vec<D>::Zero();
    patch = patch.affine_image(lin, shift);
  }
  return patch;
}

inline int surface_dimension(const std::string& type, const json& j, const std::string& where) {
  if (type == "line" || type == "circle") return 1;
  if (type == "graph") {
    const int n = detail::get_int(j, "n", 1, where);
    if (n != 1 && n != 2) detail::config_error(where, "'n' must be 1 or 2");
    return n;
  }
  for (const auto& e : surface_types())
    if (e.name == type) return 2;
  detail::config_error(where, "unknown surface type '" + type + "'");
}

/// Parses and validates a scenario. Throws Error(Config) naming the offending entry.
inline Scenario parse_scenario(const json& doc, const Overrides& ov = {}) {
  using detail::config_error;
  if (!doc.is_object()) config_error("config", "top level must be an object");
  Scenario sc;
  sc.name = detail::get_string(doc, "name", "scenario", "config");
  if (sc.name.empty() || sc.name.find_first_of("/\\") != std::string::npos) {
    config_error("config", "'name' must be a non-empty file-name-safe string");
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) config_error("config", "'seed' must be a non-negative integer");
    sc.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("quadrature")) {
    const json& q = doc.at("quadrature");
    sc.rule.order = detail::get_int(q, "order", sc.rule.order, "quadrature");
    sc.rule.grid = detail::get_int(q, "grid", sc.rule.grid, "quadrature");
    sc.max_depth = detail::get_int(q, "max_depth", sc.max_depth, "quadrature");
  }
  if (ov.quad_order) sc.rule.order = *ov.quad_order;
  if (ov.grid) sc.rule.grid = *ov.grid;
  if (ov.max_depth) sc.max_depth = *ov.max_depth;
  if (ov.seed) sc.seed = *ov.seed;
  if (sc.rule.order < 2 || sc.rule.order > 64) config_error("quadrature", "order must be in [2, 64]");
  if (sc.rule.grid < 1) config_error("quadrature", "grid must be positive");
  if (sc.max_depth < -1 || sc.max_depth > 30) config_error("quadrature", "max_depth must be in [0, 30] (or -1)");
  sc.output_dir = detail::get_string(doc, "output", "", "config");

  if (doc.contains("norms")) {
    if (!doc.at("norms").is_object()) config_error("config", "'norms' must be an object");
    for (const auto& [id, spec] : doc.at("norms").items()) {
      NormDecl d{id, detail::get_int(spec, "dim", 3, "norm '" + id + "'"), spec};
      if (d.dim == 2) {
        make_norm<2>(d);
      } else if (d.dim == 3) {
        make_norm<3>(d);
      } else {
        config_error("norm '" + id + "'", "'dim' must be 2 or 3");
      }
      sc.norms.emplace(id, d);
    }
  }
  if (doc.contains("surfaces")) {
    if (!doc.at("surfaces").is_object()) config_error("config", "'surfaces' must be an object");
    for (const auto& [id, spec] : doc.at("surfaces").items()) {
      const std::string where = "surface '" + id + "'";
      SurfaceDecl d{id, surface_dimension(detail::get_string(spec, "type", "", where), spec, where), spec};
      if (d.n == 1) {
        make_surface<1>(d);
      } else {
        make_surface<2>(d);
      }
      sc.surfaces.emplace(id, d);
    }
  }
  if (!doc.contains("checks") || !doc.at("checks").is_array()) config_error("config", "'checks' must be an array");

  std::map<std::string, int> label_uses;
  for (const auto& spec : doc.at("checks")) {
    CheckDecl c;
    c.kind = detail::get_string(spec, "kind", "", "check");
    c.label = detail::get_string(spec, "name", c.kind, "check '" + c.kind + "'");
    c.spec = spec;
    const std::string where = "check '" + c.label + "'";
    bool known = false;
    for (const auto& e : check_kinds()) known = known || e.name == c.kind;
    if (!known) config_error(where, "unknown kind '" + c.kind + "'");
    if (label_uses[c.label]++ > 0) config_error(where, "duplicate check name");

    auto norm_ref = [&](const char* key) -> const NormDecl& {
      const std::string id = detail::get_string(spec, key, "", where);
      auto it = sc.norms.find(id);
      if (it == sc.norms.end()) config_error(where, "unknown norm '" + id + "'");
      return it->second;
    };
    auto surface_ref = [&]() -> const SurfaceDecl& {
      const std::string id = detail::get_string(spec, "surface", "", where);
      auto it = sc.surfaces.find(id);
      if (it == sc.surfaces.end()) config_error(where, "unknown surface '" + id + "'");
      return it->second;
    };
    auto norm_in = [&](const json& obj, int dim) {
      const std::string id = detail::get_string(obj, "norm", "", where);
      auto it = sc.norms.find(id);
      if (it == sc.norms.end()) config_error(where, "unknown norm '" + id + "'");
      if (it->second.dim != dim) config_error(where, "norm '" + id + "' has the wrong dimension");
    };
    auto validate_xi = [&](int dim) {
      if (!spec.contains("xi")) return;
      const json& xi = spec.at("xi");
      if (xi.is_string()) {
        if (xi.get<std::string>() != "normal") config_error(where, "unknown transversal field '" + xi.get<std::string>() + "'");
        return;
      }
      const std::string t = detail::get_string(xi, "type", "", where);
      if (t == "anisotropic") {
        norm_in(xi, dim);
      } else if (t == "constant") {
        const auto v = detail::get_numbers(xi, "vector", static_cast<std::size_t>(dim), where);
        double n2 = 0.0;
        for (double x : v) n2 += x * x;
        if (!(n2 > 0.0)) config_error(where, "constant transversal field must be nonzero");
      } else if (t != "normal") {
        config_error(where, "unknown transversal field type '" + t + "'");
      }
    };
    auto validate_gauge = [&](int dim) {
      if (!spec.contains("gauge")) return;
      const json& g = spec.at("gauge");
      if (g.is_string()) {
        if (g.get<std::string>() != "euclidean") config_error(where, "unknown gauge '" + g.get<std::string>() + "'");
        return;
      }
      const std::string t = detail::get_string(g, "type", "", where);
      if (t == "dual" || t == "norm") {
        norm_in(g, dim);
      } else if (t != "euclidean") {
        config_error(where, "unknown gauge type '" + t + "'");
      }
    };
    auto validate_radii = [&](bool required) {
      const bool has_s = spec.contains("s"), has_r = spec.contains("r");
      if (has_s != has_r) config_error(where, "'s' and 'r' must be given together");
      if (!has_s && required) config_error(where, "missing radii 's' and 'r'");
      if (has_s) {
        const double s = detail::require_number(spec, "s", where), r = detail::require_number(spec, "r", where);
        if (!(s > 0.0 && s < r)) config_error(where, "radii must satisfy 0 < s < r");
      }
    };

    if (c.kind == "norm-identities" || c.kind == "condition-s") {
      norm_ref("norm");
      if (c.kind == "condition-s") {
        const std::string expect = detail::get_string(spec, "expect", "pass", where);
        if (expect != "pass" && expect != "violation") config_error(where, "'expect' must be pass or violation");
        if (detail::get_int(spec, "samples", 10000, where) < 1) config_error(where, "'samples' must be positive");
      } else if (detail::get_int(spec, "directions", 1000, where) < 1) {
        config_error(where, "'directions' must be positive");
      }
    } else if (c.kind == "lemmas") {
      const auto& s = surface_ref();
      validate_xi(s.n + 1);
      if (detail::get_int(spec, "grid", 9, where) < 1) config_error(where, "'grid' must be positive");
    } else if (c.kind == "monotonicity") {
      const auto& s = surface_ref();
      const auto& n = norm_ref("norm");
      if (n.dim != s.n + 1) config_error(where, "norm dimension does not match the surface");
      validate_radii(false);
      if (spec.contains("radii")) {
        const json& r = spec.at("radii");
        if (r.is_array()) {
          double prev = 0.0;
          for (const auto& x : r) {
            if (!x.is_number() || !(x.get<double>() > prev)) config_error(where, "'radii' must be positive and increasing");
            prev = x.get<double>();
          }
        } else if (!(r.is_string() && (r.get<std::string>() == "auto" || r.get<std::string>() == "none"))) {
          config_error(where, "'radii' must be an array, \"auto\" or \"none\"");
        }
      }
    } else if (c.kind == "equiaffine") {
      const auto& s = surface_ref();
      validate_xi(s.n + 1);
      validate_gauge(s.n + 1);
      validate_radii(true);
    } else if (c.kind == "corollary") {
      const auto& s = surface_ref();
      const auto& n = norm_ref("norm");
      if (n.dim != s.n + 1) config_error(where, "norm dimension does not match the surface");
      const std::string expect = detail::get_string(spec, "expect", "bound", where);
      if (expect != "bound" && expect != "equality" && expect != "strict") {
        config_error(where, "'expect' must be bound, equality or strict");
      }
    } else if (c.kind == "minkowski") {
      const auto& s = surface_ref();
      validate_xi(s.n + 1);
      if (spec.contains("k") && !spec.at("k").is_number_integer() && !spec.at("k").is_array()) {
        config_error(where, "'k' must be an integer or a list of integers");
      }
    } else if (c.kind == "symfunc") {
      if (detail::get_int(spec, "matrices", 100, where) < 1) config_error(where, "'matrices' must be positive");
      const int max_n = detail::get_int(spec, "max_n", 4, where);
      const int max_k = detail::get_int(spec, "max_k", 3, where);
      if (max_n < 1 || max_n > 4 || max_k < 1 || max_k > 3) {
        config_error(where, "oracle limits are max_n <= 4 and max_k <= 3");
      }
      const int trace_n = detail::get_int(spec, "trace_max_n", 5, where);
      if (trace_n < 1 || trace_n > 12) config_error(where, "'trace_max_n' must be in [1, 12]");
    }
    sc.checks.push_back(std::move(c));
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path, const Overrides& ov = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(doc, ov);
}

namespace detail {

inline Row from_identity(const IdentityReport& rep, const std::string& label) {
  Row row;
  row.name = label == rep.name ? rep.name : label + ":" + rep.name;
  row.surface = rep.surface;
  row.norm = rep.norm;
  row.s = rep.s > 0.0 ? rep.s : std::numeric_limits<double>::quiet_NaN();
  row.r = rep.r > 0.0 ? rep.r : std::numeric_limits<double>::quiet_NaN();
  row.lhs = rep.lhs;
  row.rhs = rep.rhs;
  row.residual = rep.residual;
  row.tolerance = rep.tolerance;
  row.status = !rep.asserted ? Status::Info : (rep.pass ? Status::Pass : Status::Fail);
  row.note = rep.note;
  return row;
}

/// Row for a "max residual below threshold" check.
inline Row bound_row(const std::string& name, const std::string& surface, const std::string& norm, double residual,
                     double threshold) {
  Row row;
  row.name = name;
  row.surface = surface;
  row.norm = norm;
  row.lhs = residual;
  row.rhs = 0.0;
  row.residual = residual;
  row.tolerance = threshold;
  row.status = residual < threshold ? Status::Pass : Status::Fail;
  return row;
}

/// Executes one check; errors become a single row with status "error".
class Runner {
 public:
  Runner(const Scenario& sc, const CheckDecl& check, std::size_t index)
      : sc_(sc), check_(check), where_("check '" + check.label + "'"),
        seed_(mix_seed(sc.seed, index)) {
    settings_.rule = sc.rule;
    settings_.max_depth = sc.max_depth;
  }

  CheckOutcome run() {
    out_.kind = check_.kind;
    out_.label = check_.label;
    try {
      dispatch();
    } catch (const std::exception& e) {
      Row row;
      row.name = check_.label;
      row.surface = get_string(check_.spec, "surface", "", where_);
      row.norm = get_string(check_.spec, "norm", "", where_);
      row.lhs = row.rhs = row.residual = row.tolerance = std::numeric_limits<double>::quiet_NaN();
      row.status = Status::Error;
      row.note = e.what();
      out_.rows.push_back(row);
    }
    return out_;
  }

 private:
  const json& spec() const { return check_.spec; }

  std::uint64_t seed() const {
    if (spec().contains("seed") && spec().at("seed").is_number_unsigned()) return spec().at("seed").get<std::uint64_t>();
    return seed_;
  }

  const NormDecl& norm_decl(const std::string& id) const { return sc_.norms.at(id); }
  const SurfaceDecl& surface_decl() const { return sc_.surfaces.at(spec().at("surface").get<std::string>()); }

  template <int N>
  TransversalField<N> transversal() const {
    constexpr int D = N + 1;
    if (!spec().contains("xi") || spec().at("xi").is_string()) return TransversalField<N>::euclidean_normal();
    const json& xi = spec().at("xi");
    const std::string t = xi.at("type").get<std::string>();
    if (t == "anisotropic") return TransversalField<N>::anisotropic(make_norm<D>(norm_decl(xi.at("norm").get<std::string>())));
    if (t == "constant") return TransversalField<N>::constant(get_vec<D>(xi, "vector", where_));
    return TransversalField<N>::euclidean_normal();
  }

  template <int D>
  Gauge<D> gauge() const {
    if (!spec().contains("gauge") || spec().at("gauge").is_string()) return Gauge<D>::euclidean();
    const json& g = spec().at("gauge");
    const std::string t = g.at("type").get<std::string>();
    if (t == "euclidean") return Gauge<D>::euclidean();
    const auto norm = make_norm<D>(norm_decl(g.at("norm").get<std::string>()));
    if (t == "dual") return Gauge<D>::from_dual(DualNorm<D>(norm));
    return Gauge<D>::from_norm(norm);
  }

  void dispatch() {
    const std::string& k = check_.kind;
    if (k == "symfunc") return symfunc();
    if (k == "norm-identities" || k == "condition-s") {
      const auto& nd = norm_decl(spec().at("norm").get<std::string>());
      if (nd.dim == 2) return k == "condition-s" ? condition_s<2>(nd) : norm_identities<2>(nd);
      return k == "condition-s" ? condition_s<3>(nd) : norm_identities<3>(nd);
    }
    if (surface_decl().n == 1) return surface_check<1>();
    return surface_check<2>();
  }

  template <int N>
  void surface_check() {
    const std::string& k = check_.kind;
    const auto patch = make_surface<N>(surface_decl());
    if (k == "lemmas") return lemmas<N>(patch);
    if (k == "monotonicity") return monotonicity<N>(patch);
    if (k == "equiaffine") return equiaffine<N>(patch);
    if (k == "corollary") return corollary<N>(patch);
    if (k == "minkowski") return minkowski<N>(patch);
  }

  template <int D>
  void norm_identities(const NormDecl& nd) {
    const auto norm = make_norm<D>(nd);
    const auto count = static_cast<std::size_t>(get_int(spec(), "directions", 1000, where_));
    const auto res = check_norm_identities<D>(norm, count, seed());
    const bool fd = !norm.closed_form_gradient();
    const std::string& l = check_.label;
    out_.rows.push_back(bound_row(l + ":euler", "", norm.name(), res.euler, fd ? 1e-5 : 1e-9));
    out_.rows.push_back(bound_row(l + ":radial-kernel", "", norm.name(), res.radial_kernel, fd ? 1e-5 : 1e-8));
    out_.rows.push_back(bound_row(l + ":homogeneity", "", norm.name(), res.homogeneity, 1e-10));
    Row ell;
    ell.name = l + ":ellipticity";
    ell.norm = norm.name();
    ell.lhs = res.min_ellipticity;
    ell.rhs = 0.0;
    ell.residual = res.min_ellipticity;
    ell.tolerance = 0.0;
    ell.status = res.min_ellipticity > 0.0 ? Status::Pass : Status::Fail;
    ell.note = "minimum eigenvalue of the restricted Hessian";
    out_.rows.push_back(ell);
  }

  template <int D>
  void condition_s(const NormDecl& nd) {
    const auto norm = make_norm<D>(nd);
    const auto samples = static_cast<std::size_t>(get_int(spec(), "samples", 10000, where_));
    const double eps = get_number(spec(), "eps", kSignDeadband, where_);
    const double delta = get_number(spec(), "delta", kZeroLhs, where_);
    const auto keep = static_cast<std::size_t>(get_int(spec(), "keep", 10, where_));
    const bool expect_pass = get_string(spec(), "expect", "pass", where_) == "pass";
    const auto verdict = check_condition_s<D>(norm, samples, eps, seed(), delta, keep);
    const std::string& l = check_.label;

    Row sign;
    sign.name = l + ":sign";
    sign.norm = norm.name();
    sign.lhs = static_cast<double>(verdict.violations);
    sign.rhs = 0.0;
    sign.residual = sign.lhs;
    sign.tolerance = 0.0;
    sign.status = verdict.pass == expect_pass ? Status::Pass : Status::Fail;
    sign.note = std::string(verdict.pass ? "condition S holds" : "condition S violated") + " on " +
                std::to_string(verdict.samples) + " pairs";
    out_.rows.push_back(sign);

    Row fk;
    fk.name = l + ":ferone-kawohl";
    fk.norm = norm.name();
    fk.lhs = verdict.max_fk_residual;
    fk.rhs = 0.0;
    fk.residual = verdict.max_fk_residual;
    fk.tolerance = 1e-8;
    const bool small = verdict.max_fk_residual < fk.tolerance;
    fk.status = small == expect_pass ? Status::Pass : Status::Fail;
    out_.rows.push_back(fk);

    if (get_bool(spec(), "search", false, where_)) {
      const auto sv = search_violation<D>(norm, 16, eps, seed());
      Row s;
      s.name = l + ":search";
      s.norm = norm.name();
      s.lhs = sv.objective;
      s.rhs = 0.0;
      s.residual = std::max(0.0, -sv.objective);
      s.tolerance = eps;
      s.status = (s.residual <= eps) == expect_pass ? Status::Pass : Status::Fail;
      s.note = "lhs is the smallest sign-adjusted objective found";
      if (!sv.converged) s.note += "; NonConvergence";
      out_.rows.push_back(s);
    }

    std::ostringstream csv;
    csv << "rank";
    for (int i = 0; i < D; ++i) csv << ",u" << i;
    for (int i = 0; i < D; ++i) csv << ",v" << i;
    csv << ",lhs,uv,fk_residual,violation\n";
    for (std::size_t i = 0; i < verdict.worst.size(); ++i) {
      const auto& w = verdict.worst[i];
      csv << i;
      for (int c = 0; c < D; ++c) csv << "," << fmt(w.u[c]);
      for (int c = 0; c < D; ++c) csv << "," << fmt(w.v[c]);
      csv << "," << fmt(w.lhs) << "," << fmt(w.rhs_sign_ref) << "," << fmt(w.fk_residual) << "," << fmt(w.violation)
          << "\n";
    }
    out_.artifacts.push_back({l + "-worst.csv", csv.str()});
  }

  template <int N>
  void lemmas(const ParametricPatch<N>& patch) {
    constexpr int D = N + 1;
    const auto xi = transversal<N>();
    const int grid = get_int(spec(), "grid", 9, where_);
    const double tol = get_number(spec(), "tolerance", 1e-4, where_);
    Vec<D> b;
    if constexpr (D == 2) {
      b << 1.0, -0.5;
    } else {
      b << 1.0, 2.0, -0.5;
    }
    if (spec().contains("vector")) b = get_vec<D>(spec(), "vector", where_);
    const ScalarField<N> f = [](const ParametricPatch<N>& p, const Param<N>& q) {
      const Vec<D> x = p.position(q);
      return std::sin(x[0]) + x[1] * x[D - 1];
    };
    double dx = 0.0, dx_tr = 0.0, cb = 0.0, cx = 0.0, prod = 0.0, sa = 0.0, cod = 0.0;
    std::size_t skipped = 0, used = 0;
    for (const auto& p : patch.sample_grid(grid)) {
      try {
        const auto fr = frame_at(patch, p);
        const auto ef = equiaffine_frame(patch, xi, fr);
        for (const auto& field : {fields::position<N>(), fields::constant<N>(b)}) {
          const auto r = check_lemma_DX_top<N>(patch, xi, field, p);
          dx = std::max(dx, r.matrix);
          dx_tr = std::max(dx_tr, r.trace);
        }
        const auto c = check_lemma_const_and_position<N>(patch, xi, p, b);
        cb = std::max(cb, c.b);
        cx = std::max(cx, c.x);
        prod = std::max(prod, check_lemma_product<N>(patch, xi, f, fields::position<N>(), p));
        for (double v : check_self_adjoint<N>(fr, ef, 2)) sa = std::max(sa, v);
        cod = std::max(cod, codazzi_residual<N>(patch, xi, p));
        ++used;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotTransversal) throw;
        ++skipped;
      }
    }
    if (used == 0) throw Error(ErrorKind::NotTransversal, xi.name + " is tangent at every sample point");
    const std::string& l = check_.label;
    const std::string note = skipped ? std::to_string(skipped) + " non-transversal points skipped" : "";
    for (auto [name, value] : std::vector<std::pair<const char*, double>>{{"full-derivative", dx},
                                                                           {"full-derivative-trace", dx_tr},
                                                                           {"constant-vector", cb},
                                                                           {"position-vector", cx},
                                                                           {"product-rule", prod},
                                                                           {"self-adjoint", sa},
                                                                           {"codazzi", cod}}) {
      Row row = bound_row(l + ":" + name, patch.name(), xi.name, value, tol);
      row.note = note;
      out_.rows.push_back(row);
    }
  }

  template <int N>
  void monotonicity(const ParametricPatch<N>& patch) {
    constexpr int D = N + 1;
    const auto norm = make_norm<D>(norm_decl(spec().at("norm").get<std::string>()));
    std::vector<double> radii;
    const std::string mode =
        spec().contains("radii") && spec().at("radii").is_string() ? spec().at("radii").get<std::string>() : "";
    if (spec().contains("radii") && spec().at("radii").is_array()) {
      radii = spec().at("radii").get<std::vector<double>>();
    } else if (mode == "auto" || (!spec().contains("s") && mode != "none")) {
      const DualNorm<D> dual(norm);
      radii = default_radii<N>(patch, Gauge<D>::from_dual(dual), get_int(spec(), "count", 8, where_));
    }
    double s = 0.0, r = 0.0;
    if (spec().contains("s")) {
      s = spec().at("s").get<double>();
      r = spec().at("r").get<double>();
    } else if (radii.size() >= 2) {
      s = radii.front();
      r = radii.back();
    }
    if (s > 0.0) out_.rows.push_back(from_identity(monotonicity_identity<N>(patch, norm, s, r, settings_), check_.label));
    if (radii.empty()) return;

    const auto scan = energy_scan<N>(patch, norm, radii, settings_);
    Row row;
    row.name = check_.label + ":energy-scan";
    row.surface = patch.name();
    row.norm = norm.name();
    row.s = radii.front();
    row.r = radii.back();
    row.lhs = scan.front().normalized;
    row.rhs = scan.back().normalized;
    double worst_drop = 0.0, tol = 0.0;
    for (std::size_t i = 1; i < scan.size(); ++i) {
      worst_drop = std::max(worst_drop, scan[i - 1].normalized - scan[i].normalized);
      tol = std::max(tol, scan[i].estimate + scan[i - 1].estimate);
    }
    row.residual = worst_drop;
    row.tolerance = tol;
    row.status = non_decreasing(scan) ? Status::Pass : Status::Fail;
    row.note = "residual is the largest drop of E(r)/r^n between consecutive radii";
    out_.rows.push_back(row);

    const std::string base = check_.label + "-energy";
    std::ostringstream csv;
    csv << "r,energy,normalized,estimate\n";
    for (const auto& e : scan) csv << fmt(e.r) << "," << fmt(e.energy) << "," << fmt(e.normalized) << "," << fmt(e.estimate) << "\n";
    out_.artifacts.push_back({base + ".csv", csv.str()});
    // Artifacts are written with the scenario name as prefix.
    const std::string written = sc_.name + "-" + base;
    std::ostringstream gp;
    gp << "# gnuplot script: normalized energy E(r)/r^" << N << "\n"
       << "set datafile separator ','\n"
       << "set key off\n"
       << "set xlabel 'r'\n"
       << "set ylabel 'E(r)/r^" << N << "'\n"
       << "set title '" << patch.name() << ", " << norm.name() << "'\n"
       << "set terminal pngcairo size 800,600\n"
       << "set output '" << written << ".png'\n"
       << "plot '" << written << ".csv' every ::1 using 1:3 with linespoints\n";
    out_.artifacts.push_back({base + ".gp", gp.str()});
  }

  template <int N>
  void equiaffine(const ParametricPatch<N>& patch) {
    constexpr int D = N + 1;
    const auto xi = transversal<N>();
    const auto phi = gauge<D>();
    const double s = spec().at("s").get<double>(), r = spec().at("r").get<double>();
    out_.rows.push_back(from_identity(equiaffine_identity<N>(patch, xi, phi, s, r, settings_), check_.label));
    if (!get_bool(spec(), "pointwise", true, where_)) return;
    double worst = 0.0;
    for (const auto& p : patch.sample_grid(get_int(spec(), "grid", 9, where_))) {
      try {
        worst = std::max(worst, pointwise_divergence_V<N>(patch, xi, phi, p).residual);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::GaugeZero && e.kind() != ErrorKind::NotTransversal) throw;
      }
    }
    out_.rows.push_back(bound_row(check_.label + ":divergence", patch.name(), xi.name + "/" + phi.name, worst, 1e-4));
  }

  template <int N>
  void corollary(const ParametricPatch<N>& patch) {
    constexpr int D = N + 1;
    const auto norm = make_norm<D>(norm_decl(spec().at("norm").get<std::string>()));
    const auto rep = corollary_lower_bound<N>(patch, norm, settings_);
    const std::string expect = get_string(spec(), "expect", "bound", where_);
    Row row;
    row.name = check_.label + ":" + expect;
    row.surface = patch.name();
    row.norm = norm.name();
    row.r = 1.0;
    row.lhs = rep.energy;
    row.rhs = rep.bound;
    row.residual = rep.ratio - 1.0;
    row.tolerance = rep.tolerance;
    bool ok = rep.ratio_at_least_one;
    if (expect == "equality") {
      const double rel = get_number(spec(), "rel_tol", 1e-4, where_);
      row.tolerance = rel;
      ok = std::abs(rep.ratio - 1.0) <= rel;
    } else if (expect == "strict") {
      ok = rep.ratio > 1.0 + 5.0 * rep.tolerance;
    }
    row.status = !rep.asserted ? Status::Info : (ok ? Status::Pass : Status::Fail);
    row.note = rep.note.empty() ? "residual is ratio - 1" : rep.note;
    out_.rows.push_back(row);
  }

  template <int N>
  void minkowski(const ParametricPatch<N>& patch) {
    const auto xi = transversal<N>();
    std::vector<int> ks;
    if (!spec().contains("k")) {
      for (int k = 0; k < N; ++k) ks.push_back(k);
    } else if (spec().at("k").is_array()) {
      ks = spec().at("k").get<std::vector<int>>();
    } else {
      ks.push_back(spec().at("k").get<int>());
    }
    for (int k : ks) out_.rows.push_back(from_identity(minkowski_formula<N>(patch, xi, k, settings_), check_.label));
  }

  void symfunc() {
    const int matrices = get_int(spec(), "matrices", 100, where_);
    const int max_n = get_int(spec(), "max_n", 4, where_);
    const int max_k = get_int(spec(), "max_k", 3, where_);
    const int trace_n = get_int(spec(), "trace_max_n", 5, where_);
    std::mt19937_64 rng(seed());
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto random_matrix = [&](int n) {
      DenseMatrix a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = unit(rng);
      return a;
    };
    double recursion = 0.0, minors = 0.0, gradient = 0.0, euler = 0.0, trace = 0.0, cayley = 0.0;
    for (int m = 0; m < matrices; ++m) {
      const int n = 1 + m % max_n;
      const DenseMatrix a = random_matrix(n);
      for (int k = 0; k <= std::min(n, max_k); ++k) {
        recursion = std::max(recursion, (newton_tensor(a, k) - newton_entries_oracle(a, k)).cwiseAbs().maxCoeff());
      }
      for (int k = 1; k <= n; ++k) {
        minors = std::max(minors, std::abs(sigma_k(a, k) - sigma_k_minors_oracle(a, k)));
        gradient = std::max(gradient, check_gradient_relation(a, k));
      }
      const DenseMatrix b = random_matrix(1 + m % trace_n);
      for (int k = 1; k <= b.rows(); ++k) {
        const auto t = check_trace_identities(b, k);
        euler = std::max(euler, t.euler);
        trace = std::max(trace, t.trace);
      }
      cayley = std::max(cayley, newton_tensor(b, static_cast<int>(b.rows())).cwiseAbs().maxCoeff());
    }
    const std::string& l = check_.label;
    out_.rows.push_back(bound_row(l + ":recursion-vs-kronecker", "", "", recursion, 1e-10));
    out_.rows.push_back(bound_row(l + ":sigma-vs-minors", "", "", minors, 1e-10));
    out_.rows.push_back(bound_row(l + ":gradient-relation", "", "", gradient, 1e-6));
    out_.rows.push_back(bound_row(l + ":trace-euler", "", "", euler, 1e-9));
    out_.rows.push_back(bound_row(l + ":trace-newton", "", "", trace, 1e-9));
    out_.rows.push_back(bound_row(l + ":cayley-hamilton", "", "", cayley, 1e-8));
  }

  const Scenario& sc_;
  const CheckDecl& check_;
  std::string where_;
  std::uint64_t seed_;
  VerifySettings settings_;
  CheckOutcome out_;
};

}  // namespace detail

/// Runs every check on `jobs` worker threads. Outcomes are returned in
/// declaration order regardless of completion order.
inline std::vector<CheckOutcome> run_checks(const Scenario& sc, unsigned jobs = 1) {
  std::vector<CheckOutcome> out(sc.checks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sc.checks.size(); i = next++) out[i] = detail::Runner(sc, sc.checks[i], i).run();
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(sc.checks.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

inline std::string csv_row(const Row& row) {
  using detail::fmt;
  std::ostringstream os;
  os << row.name << "," << row.surface << "," << row.norm << "," << fmt(row.s) << "," << fmt(row.r) << ","
     << fmt(row.lhs) << "," << fmt(row.rhs) << "," << fmt(row.residual) << "," << fmt(row.tolerance) << ","
     << to_string(row.status);
  return os.str();
}

/// Report CSVs keyed by file name, one per check kind in order of first use.
inline std::vector<Artifact> report_files(const Scenario& sc, const std::vector<CheckOutcome>& outcomes) {
  std::vector<Artifact> files;
  std::map<std::string, std::size_t> index;
  for (const auto& o : outcomes) {
    auto it = index.find(o.kind);
    if (it == index.end()) {
      it = index.emplace(o.kind, files.size()).first;
      files.push_back({sc.name + "-" + o.kind + ".csv", std::string(kReportHeader) + "\n" + kReportColumns + "\n"});
    }
    for (const auto& row : o.rows) files[it->second].content += csv_row(row) + "\n";
  }
  for (const auto& o : outcomes)
    for (const auto& a : o.artifacts) files.push_back({sc.name + "-" + a.filename, a.content});
  return files;
}

inline std::string summary_line(const Row& row) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-5s %s", to_string(row.status), row.name.c_str());
  os << buf;
  if (!row.surface.empty()) os << " [" << row.surface << "]";
  if (!row.norm.empty()) os << " [" << row.norm << "]";
  if (!std::isnan(row.s)) os << " s=" << detail::fmt(row.s);
  if (!std::isnan(row.r)) os << " r=" << detail::fmt(row.r);
  os << " residual=" << detail::fmt(row.residual) << " tolerance=" << detail::fmt(row.tolerance);
  if (!row.note.empty()) os << "  (" << row.note << ")";
  return os.str();
}

/// 0 when every asserted row passes, 1 otherwise.
inline int exit_code(const std::vector<CheckOutcome>& outcomes) {
  for (const auto& o : outcomes)
    for (const auto& row : o.rows)
      if (row.status == Status::Fail || row.status == Status::Error) return 1;
  return 0;
}

}  // namespace wulffkit::scenario
