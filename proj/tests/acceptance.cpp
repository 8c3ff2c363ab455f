#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "wulffkit/wulffkit.hpp"

using namespace wulffkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) { return detail::format_sci(x); }

Mat<3> sample_matrix() {
  Mat<3> a;
  a << 1.5, 0.2, 0.1, 0.2, 1.0, -0.15, 0.1, -0.15, 0.7;
  return a;
}

Outcome norm_identities() {
  const auto q = MinkowskiNorm<3>::quadratic(sample_matrix());
  const auto fd = MinkowskiNorm<3>::custom("quadratic-fd", [q](const Vec<3>& u) { return q.eval(u); });
  double euler = 0.0, radial = 0.0;
  for (const auto& n : {MinkowskiNorm<3>::euclidean(), q}) {
    const auto r = check_norm_identities(n, 1000);
    euler = std::max(euler, r.euler);
    radial = std::max(radial, r.radial_kernel);
  }
  const auto rf = check_norm_identities(fd, 1000);
  const bool pass = euler < 1e-9 && radial < 1e-8 && rf.euler < 1e-5 && rf.radial_kernel < 1e-5;
  return {pass, "euler " + sci(euler) + " radial " + sci(radial) + " fd euler " + sci(rf.euler) + " fd radial " +
                    sci(rf.radial_kernel)};
}

Outcome duality() {
  const auto q = MinkowskiNorm<3>::quadratic(sample_matrix());
  const DualNorm<3> numeric(q, DualMode::Numeric);
  const DualNorm<3> bidual(as_norm(DualNorm<3>(q)), DualMode::Numeric);
  SphereSequence<3> dirs(17);
  double dual_err = 0.0, bidual_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec<3> v = dirs.next();
    const double exact = std::sqrt(v.dot(q.matrix_inverse() * v));
    dual_err = std::max(dual_err, std::abs(numeric.value(v) - exact) / exact);
    bidual_err = std::max(bidual_err, std::abs(bidual.value(v) - q.eval(v)) / q.eval(v));
  }
  return {dual_err < 1e-6 && bidual_err < 1e-4, "dual rel " + sci(dual_err) + " bidual rel " + sci(bidual_err)};
}

Outcome condition_s() {
  const auto q2 = MinkowskiNorm<2>::quadratic(Vec<2>(1, 4).asDiagonal().toDenseMatrix());
  const auto q3 = MinkowskiNorm<3>::quadratic(sample_matrix());
  const auto v2 = check_condition_s<2>(q2, 10000);
  const auto v3 = check_condition_s<3>(q3, 10000);
  const auto l4 = check_condition_s<2>(MinkowskiNorm<2>::quartic_regularized(0.1), 10000);
  const double fk = std::max(v2.max_fk_residual, v3.max_fk_residual);
  const bool regression = std::abs(l4.max_fk_residual - 0.615323744789) < 1e-6;
  const bool pass = v2.pass && v3.pass && fk < 1e-8 && l4.max_fk_residual > 0.0 && regression;
  return {pass, "quadratic fk " + sci(fk) + " quartic max fk " + std::to_string(l4.max_fk_residual)};
}

Outcome lemma_suite() {
  const auto q = MinkowskiNorm<3>::quadratic(sample_matrix());
  const std::vector<TransversalField<2>> xis = {TransversalField<2>::euclidean_normal(),
                                                TransversalField<2>::anisotropic(q),
                                                TransversalField<2>::constant(Vec<3>(0.2, -0.1, 1.0))};
  const Vec<3> b(0.3, -0.5, 0.8);
  const DualNorm<3> dual(q);
  const ScalarField<2> f = [dual](const ParametricPatch<2>& pa, const Param<2>& p) { return dual.value(pa.position(p)); };
  double worst = 0.0;
  std::size_t points = 0, skipped = 0;
  for (const auto& patch : {surfaces::sphere(), surfaces::ellipsoid(1.0, 1.3, 1.7), surfaces::catenoid(1.0)}) {
    for (const auto& xi : xis) {
      for (const auto& p : patch.sample_grid(9)) {
        const auto frame = frame_at(patch, p);
        if (std::abs(xi.at(patch, p).dot(frame.nu)) <= 1e-2) {
          ++skipped;
          continue;
        }
        const auto dx = check_lemma_DX_top<2>(patch, xi, fields::position<2>(), p);
        const auto cp = check_lemma_const_and_position<2>(patch, xi, p, b);
        const double prod = check_lemma_product<2>(patch, xi, f, fields::position<2>(), p);
        const auto sa = check_self_adjoint<2>(frame, equiaffine_frame(patch, xi, frame));
        const double cod = codazzi_residual<2>(patch, xi, p);
        for (double r : {dx.matrix, dx.trace, cp.b, cp.x, prod, sa[0], sa[1], cod}) worst = std::max(worst, r);
        ++points;
      }
    }
  }
  return {worst < 1e-4, "max residual " + sci(worst) + " over " + std::to_string(points) + " points (" +
                            std::to_string(skipped) + " nearly tangent skipped)"};
}

Outcome monotonicity() {
  const double d = 0.5, s = 0.6, r = 1.0;
  const auto line = surfaces::line(Vec<2>(0, d), Vec<2>(1, 0), 3.0);
  const auto lr = monotonicity_identity<1>(line, MinkowskiNorm<2>::euclidean(), s, r);
  const double exact = 2.0 * (std::sqrt(r * r - d * d) / r - std::sqrt(s * s - d * d) / s);
  const double line_err = std::max(std::abs(lr.lhs - exact), std::abs(lr.rhs - exact));

  const auto q = MinkowskiNorm<3>::quadratic(sample_matrix());
  const auto cat = surfaces::transformed_catenoid(sample_matrix(), 1.5);
  VerifySettings d8, d10;
  d8.max_depth = 8;
  d10.max_depth = 10;
  const auto m8 = monotonicity_identity<2>(cat, q, 1.3, 2.4, d8);
  const auto m10 = monotonicity_identity<2>(cat, q, 1.3, 2.4, d10);
  const bool cross = std::abs(m8.lhs - m10.lhs) <= 3.0 * (m8.tolerance + m10.tolerance) &&
                     std::abs(m8.rhs - m10.rhs) <= 3.0 * (m8.tolerance + m10.tolerance);
  const auto radii = default_radii<2>(cat, Gauge<3>::from_dual(DualNorm<3>(q)));
  const auto scan = energy_scan<2>(cat, q, radii, d8);
  const bool pass = line_err < 1e-6 && m8.pass && m10.pass && cross && scan.size() == 8 && non_decreasing(scan);
  return {pass, "line err " + sci(line_err) + " depth8 " + sci(m8.residual) + "/" + sci(m8.tolerance) + " depth10 " +
                    sci(m10.residual) + "/" + sci(m10.tolerance) + " scan " + (non_decreasing(scan) ? "up" : "DOWN")};
}

Outcome equiaffine() {
  const auto cat = surfaces::catenoid(1.5);
  VerifySettings settings;
  settings.max_depth = 8;
  const auto rep = equiaffine_identity<2>(cat, TransversalField<2>::euclidean_normal(), Gauge<3>::euclidean(), 1.2,
                                          2.0, settings);
  const auto q = MinkowskiNorm<3>::quadratic(sample_matrix());
  const auto xi = TransversalField<2>::anisotropic(q);
  const auto phi = Gauge<3>::from_dual(DualNorm<3>(q));
  double worst = 0.0;
  for (const auto& patch : {surfaces::sphere(), surfaces::ellipsoid(1.0, 1.3, 1.7), surfaces::catenoid(1.0)})
    for (const auto& p : patch.sample_grid(9)) worst = std::max(worst, pointwise_divergence_V<2>(patch, xi, phi, p).residual);
  return {rep.pass && worst < 1e-4,
          "catenoid " + sci(rep.residual) + "/" + sci(rep.tolerance) + " pointwise div " + sci(worst)};
}

Outcome corollary() {
  const auto plane = surfaces::hyperplane(Vec<3>::Zero(), Vec<3>(0.2, -0.3, 1.0), 3.0);
  const auto e = corollary_lower_bound<2>(plane, MinkowskiNorm<3>::euclidean());
  const auto q = corollary_lower_bound<2>(plane, MinkowskiNorm<3>::quadratic(sample_matrix()));
  const auto en = corollary_lower_bound<2>(surfaces::enneper(1.0, 1.0), MinkowskiNorm<3>::euclidean());
  const double eq = std::max(std::abs(e.ratio - 1.0), std::abs(q.ratio - 1.0));
  const bool strict = en.asserted && en.ratio > 1.0 + 5.0 * en.tolerance;
  return {eq < 1e-4 && strict, "hyperplane |ratio-1| " + sci(eq) + " enneper ratio " + std::to_string(en.ratio) +
                                   " tol " + sci(en.tolerance)};
}

Outcome matrix_suite() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random = [&](int n) {
    DenseMatrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = u(rng);
    return a;
  };
  double oracle = 0.0, grad = 0.0, trace = 0.0, cayley = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + rep % 4;
    const DenseMatrix a = random(n);
    for (int k = 0; k <= std::min(n, 3); ++k)
      oracle = std::max(oracle, (newton_tensor(a, k) - newton_entries_oracle(a, k)).cwiseAbs().maxCoeff());
    for (int k = 1; k <= n; ++k) grad = std::max(grad, check_gradient_relation(a, k));
  }
  for (int n = 1; n <= 5; ++n) {
    for (int rep = 0; rep < 10; ++rep) {
      const DenseMatrix a = random(n);
      for (int k = 1; k <= n; ++k) {
        const auto t = check_trace_identities(a, k);
        trace = std::max({trace, t.euler, t.trace});
      }
      cayley = std::max(cayley, newton_tensor(a, n).cwiseAbs().maxCoeff() / std::pow(std::max(1.0, a.norm()), n));
    }
  }
  return {oracle < 1e-10 && grad < 1e-6 && trace < 1e-9 && cayley < 1e-8,
          "oracle " + sci(oracle) + " gradient " + sci(grad) + " trace " + sci(trace) + " T_n " + sci(cayley)};
}

Outcome minkowski() {
  const auto nu = TransversalField<2>::euclidean_normal();
  double sphere_rel = 0.0;
  for (int k : {0, 1}) {
    const auto rep = minkowski_formula<2>(surfaces::sphere(), nu, k);
    const double exact = k == 0 ? 4 * kPi : -4 * kPi;
    sphere_rel = std::max({sphere_rel, rep.residual / (4 * kPi), std::abs(rep.lhs - exact) / (4 * kPi)});
  }
  const auto xi = TransversalField<2>::anisotropic(MinkowskiNorm<3>::quadratic(sample_matrix()));
  bool ellipsoid = true;
  std::string detail = "sphere rel " + sci(sphere_rel);
  for (int k : {0, 1}) {
    const auto rep = minkowski_formula<2>(surfaces::ellipsoid(1.0, 1.3, 1.7), xi, k);
    ellipsoid = ellipsoid && rep.pass;
    detail += " ellipsoid k" + std::to_string(k) + " " + sci(rep.residual) + "/" + sci(rep.tolerance);
  }
  return {sphere_rel < 1e-8 && ellipsoid, detail};
}

int run_cli(const std::string& args) {
  const std::string cmd = "'" WULFFKIT_CLI "' " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[entry.path().filename().string()] = ss.str();
  }
  return files;
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / ("wulffkit-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::size_t scenarios = 0, identical = 0, exit_ok = 0;
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(WULFFKIT_SCENARIOS))
    if (entry.path().extension() == ".json") configs.push_back(entry.path());
  std::sort(configs.begin(), configs.end());
  for (const auto& cfg : configs) {
    ++scenarios;
    const fs::path a = root / (cfg.stem().string() + "-a"), b = root / (cfg.stem().string() + "-b");
    const int ca = run_cli("run --config '" + cfg.string() + "' --out '" + a.string() + "'");
    const int cb = run_cli("run --config '" + cfg.string() + "' --out '" + b.string() + "'");
    if (ca == 0 && cb == 0) ++exit_ok;
    if (fs::exists(a) && fs::exists(b) && read_dir(a) == read_dir(b) && !read_dir(a).empty()) ++identical;
  }

  fs::create_directories(root / "crafted");
  auto crafted = [&](const std::string& s, const std::string& expect) {
    const fs::path p = root / "crafted" / "config.json";
    std::ofstream(p) << R"({"name": "crafted",
      "norms": {"e2": {"family": "euclidean", "dim": 2},
                "q4": {"family": "quartic-regularized", "dim": 2, "eps": 0.1}},
      "surfaces": {"line": {"type": "line", "origin": [0.0, 0.5], "direction": [1.0, 0.0], "half_length": 3.0}},
      "checks": [
        {"kind": "monotonicity", "name": "offset", "norm": "e2", "surface": "line", "s": )"
                     << s << R"(, "r": 1.0},
        {"kind": "condition-s", "name": "cs", "norm": "q4", "samples": 500, "expect": ")"
                     << expect << R"("}]})";
    return run_cli("run --config '" + p.string() + "' --out '" + (root / "crafted").string() + "'");
  };
  const int code_pass = crafted("0.6", "violation");
  const int code_fail = crafted("0.6", "pass");
  const int code_config = crafted("1.5", "violation");
  fs::remove_all(root);
  const bool codes = code_pass == 0 && code_fail == 1 && code_config == 2;
  return {scenarios > 0 && identical == scenarios && exit_ok == scenarios && codes,
          std::to_string(identical) + "/" + std::to_string(scenarios) + " identical, exit codes " +
              std::to_string(code_pass) + "/" + std::to_string(code_fail) + "/" + std::to_string(code_config)};
}

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "norm identities", 1.0, norm_identities},
      {2, "duality", 10.0, duality},
      {3, "condition S", 30.0, condition_s},
      {4, "lemma suite", 60.0, lemma_suite},
      {5, "monotonicity identity", 300.0, monotonicity},
      {6, "equiaffine identity", 120.0, equiaffine},
      {7, "corollary lower bound", 60.0, corollary},
      {8, "matrix suite", 5.0, matrix_suite},
      {9, "minkowski formula", 120.0, minkowski},
      {10, "cli determinism", 0.0, cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = c.budget_s <= 0.0 || secs < c.budget_s;
    const bool pass = out.pass && in_budget;
    if (!pass) ++failures;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << ") " << timing
              << (in_budget ? "" : " over budget") << ": " << out.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
