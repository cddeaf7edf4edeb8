// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned.
// Exit status is the number of failed criteria (capped at 1).

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bergkern/cli.hpp"
#include "bergkern/closed_kernels.hpp"
#include "bergkern/sampling.hpp"
#include "bergkern/series_kernel.hpp"
#include "bergkern/verify.hpp"
#include "oracles.hpp"

using namespace bergkern;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

double rel(complex a, complex b) { return std::abs(a - b) / std::abs(b); }

std::vector<complex> coords(const ComplexPoint& p) { return {p.coords().begin(), p.coords().end()}; }

KernelEvaluator closed_eval(const FamilyParams& p) {
  return [k = FamilyKernel(p)](const ComplexPoint& x, const ComplexPoint& y) { return k(x, y).value; };
}

// 1. Fock reduction
void fock_reduction(Outcome& o) {
  double worst = 0.0;
  std::uint64_t seed = 1;
  for (int n : {1, 2, 3}) {
    for (double mu1 : {0.5, 1.0, 2.0}) {
      const CnParams p{n, mu1, 2.0};
      const auto pts = sample_interior_points(p, 100, seed++);
      for (std::size_t i = 0; i < pts.size(); i += 2) {
        const complex got = kernel_cn(p, pts[i], pts[i + 1]).value;
        worst = std::max(worst, rel(got, oracle::fock_kernel(coords(pts[i]), coords(pts[i + 1]), mu1)));
      }
    }
  }
  o.require(worst <= 1e-12, "relative error above 1e-12");
  o.detail << "max_rel=" << worst << " tol=1e-12 over 9 settings x 50 pairs";
}

// 2. Classical disc kernel from quadrature moments
void disc_kernel(Outcome& o) {
  auto table = std::make_shared<MomentTable>(RadialWeight::constant(1), ShadowRegion::ball(1), 1e-10,
                                             MomentTable::Preference::QuadratureOnly);
  const KernelSeries series(table, 400);
  const auto pts = sample_interior_points(ShadowRegion::ball(1), 40, 2, 0.51);  // |z|^2 <= 0.49
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); i += 2) {
    o.require(std::abs(pts[i][0]) <= 0.7 && std::abs(pts[i + 1][0]) <= 0.7, "point outside |z| <= 0.7");
    const complex got = kernel_series_eval(series, pts[i], pts[i + 1]).value;
    worst = std::max(worst, rel(got, oracle::disc_kernel(pts[i][0], pts[i + 1][0])));
  }
  o.require(worst <= 1e-6, "relative error above 1e-6");
  o.detail << "max_rel=" << worst << " tol=1e-6 over 20 pairs";
}

// 3. Closed form against the moment series, per family
void dual_route(Outcome& o) {
  struct Case {
    FamilyParams p;
    double tol;
  };
  const std::vector<Case> cases{
      {CnParams{2, 1.0, 1.0}, 1e-7},          {CnParams{2, 1.0, 2.0}, 1e-7},
      {CnParams{2, 1.0, 3.0}, 1e-7},          {DnmParams{1, 1, 1.0, 2.0, 0.0}, 1e-7},
      {DnmParams{1, 1, 1.0, 2.0, 0.5}, 1e-7}, {DnmParams{2, 1, 1.0, 2.0, 0.0}, 1e-7},
      {DnmParams{2, 1, 1.0, 2.0, 0.5}, 1e-7}, {VEtaParams{1, 1, {1.0}, 0.0}, 1e-6},
      {VEtaParams{1, 1, {1.0}, 1.0}, 1e-6},
  };
  std::uint64_t seed = 30;
  int checked = 0;
  for (const auto& c : cases) {
    double worst = 0.0;
    for (const auto& r : cross_validate_family(c.p, 10, seed++, c.tol)) {
      o.require(r.status == CheckStatus::Pass, family_descriptor(c.p).dump() + " " + to_string(r.status));
      worst = std::max(worst, r.measured);
      ++checked;
    }
    o.detail << family_descriptor(c.p)["family"].get<std::string>() << ":" << worst << " ";
  }
  o.detail << "(" << checked << " pairs, slack >= 0.3)";
}

// 4. Closed-form moments against quadrature
void moments(Outcome& o) {
  const std::vector<FamilyParams> settings{
      CnParams{1, 1.0, 2.0},          CnParams{2, 0.5, 3.0},           CnParams{2, 2.0, 1.0},
      DnmParams{1, 1, 1.0, 2.0, 0.0}, DnmParams{1, 1, 0.7, 1.5, 0.5},  DnmParams{2, 1, 1.0, 2.0, 1.0},
      VEtaParams{1, 1, {1.0}, 0.0},   VEtaParams{1, 1, {0.5}, 1.0},    VEtaParams{1, 1, {2.0}, 0.5},
  };
  double worst = 0.0;
  int count = 0;
  for (const auto& p : settings) {
    const auto w = family_weight(p);
    const auto s = family_shadow(p);
    const int n = w.arity();
    for (int d = 0; d <= 6; ++d) {
      for (const auto& alpha : enumerate_degree_shell(n, d)) {
        const double closed = *closed_form_log_moment(w, s, alpha);
        const double quad = moment_quadrature(s, w, alpha, 1e-10).log_value;
        worst = std::max(worst, std::abs(std::expm1(quad - closed)));
        ++count;
      }
    }
  }
  o.require(worst <= 1e-7, "relative disagreement above 1e-7");
  o.detail << "max_rel=" << worst << " tol=1e-7 over " << count << " moments";
}

// 5. Sphere integral against Monte Carlo
void sphere(Outcome& o) {
  int count = 0;
  double worst_sigma = 0.0;
  std::uint64_t stream = 0;
  for (int n : {2, 3}) {
    for (int d = 0; d <= 4; ++d) {
      for (const auto& alpha : enumerate_degree_shell(n, d)) {
        const auto r = check_sphere_integral(alpha, 1000000, 5, stream++);
        const double oracle = oracle::sphere_formula(alpha.entries());
        o.require(std::abs(r.expected - oracle) <= 1e-13 * oracle, "formula differs from oracle at " + alpha.to_string());
        o.require(r.status == CheckStatus::Pass, "outside 4 sigma at " + alpha.to_string());
        worst_sigma = std::max(worst_sigma, std::abs(r.measured - r.expected) / *r.standard_error);
        ++count;
      }
    }
  }
  o.detail << "max_dev=" << worst_sigma << " sigma (limit 4) over " << count << " indices, 1e6 samples each";
}

// 6. Reproducing property
std::vector<VerificationReport> reproducing_mc() {
  const DnmParams p{1, 1, 1.0, 2.0, 0.0};
  const ComplexPoint z0{{0.2, 0.1}, {0.3, -0.1}};
  std::vector<VerificationReport> out;
  std::uint64_t stream = 0;
  for (const MultiIndex& a : {MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{0, 2}}) {
    const Polynomial f{{a, complex(1.0)}};
    out.push_back(check_reproducing(closed_eval(p), family_weight(p), family_shadow(p), f, z0,
                                    MonteCarloScheme{100000, 42, stream++, 0.0}));
  }
  return out;
}

void reproducing(Outcome& o) {
  double worst = 0.0;
  int count = 0;
  const CnParams fock{1, 1.0, 2.0};
  const KernelEvaluator disc = [](const ComplexPoint& x, const ComplexPoint& y) { return kernel_ball(1, 1.0, x, y); };
  struct Setup {
    KernelEvaluator k;
    RadialWeight w;
    ShadowRegion s;
    ComplexPoint z0;
  };
  const std::vector<Setup> setups{
      {closed_eval(fock), family_weight(fock), family_shadow(fock), ComplexPoint{{0.3, 0.2}}},
      {closed_eval(fock), family_weight(fock), family_shadow(fock), ComplexPoint{{-0.8, 0.5}}},
      {disc, RadialWeight::constant(1), ShadowRegion::ball(1), ComplexPoint{{0.4, 0.0}}},
      {disc, RadialWeight::constant(1), ShadowRegion::ball(1), ComplexPoint{{-0.3, 0.5}}},
  };
  for (const auto& s : setups) {
    for (int k = 0; k <= 6; ++k) {
      const Polynomial f{{MultiIndex{k}, complex(1.0)}};
      const auto r = check_reproducing(s.k, s.w, s.s, f, s.z0, QuadratureScheme{});
      o.require(r.passed && r.measured <= 1e-6, "quadrature reproducing w^" + std::to_string(k));
      worst = std::max(worst, r.measured);
      ++count;
    }
  }
  double worst_sigma = 0.0;
  for (const auto& r : reproducing_mc()) {
    o.require(r.status == CheckStatus::Pass, "Monte Carlo reproducing on D_{1,1}: " + to_string(r.status));
    worst_sigma = std::max(worst_sigma, r.measured / *r.standard_error);
  }
  o.detail << "quadrature max_err=" << worst << " tol=1e-6 (" << count << " checks); mc max_dev=" << worst_sigma
           << " sigma (limit 4, 1e5 samples)";
}

// 7. Parseval identity
void parseval(Outcome& o) {
  const std::vector<FamilyParams> families{CnParams{2, 1.0, 3.0}, DnmParams{1, 1, 1.0, 2.0, 0.5},
                                           VEtaParams{1, 1, {1.0}, 0.5}};
  auto rng = make_stream(77, 0);
  double worst = 0.0, worst_sigma = 0.0;
  int count = 0;
  std::uint64_t stream = 0;
  for (const auto& p : families) {
    const auto w = family_weight(p);
    const auto s = family_shadow(p);
    for (int i = 0; i < 10; ++i) {
      const auto f = random_sparse_polynomial(w.arity(), 4, 3, rng);
      const auto r = check_parseval(f, w, s, QuadratureScheme{});
      o.require(r.passed, "deterministic parseval on " + family_descriptor(p).dump());
      worst = std::max(worst, std::abs(r.measured - r.expected));
      ++count;
      const auto m = check_parseval(f, w, s, MonteCarloScheme{50000, 77, stream++, 0.0});
      o.require(m.status == CheckStatus::Pass, "mc parseval on " + family_descriptor(p).dump() + ": " + to_string(m.status));
      worst_sigma = std::max(worst_sigma, std::abs(m.measured - m.expected) / *m.standard_error);
    }
  }
  o.detail << "quadrature max_err=" << worst << " tol=1e-6; mc max_dev=" << worst_sigma << " sigma (limit 4); "
           << count << " polynomials";
}

// 8. Hermitian symmetry and Gram PSD
void hermitian_gram(Outcome& o) {
  const std::vector<FamilyParams> families{CnParams{2, 1.0, 1.5}, DnmParams{1, 1, 1.0, 2.0, 0.5},
                                           DnmParams{2, 1, 0.8, 1.0, 0.0}, VEtaParams{1, 1, {1.0}, 0.5},
                                           VEtaParams{2, 1, {1.0, 0.5}, 0.0}};
  double worst_h = 0.0, worst_g = 0.0;
  std::uint64_t seed = 80;
  for (const auto& p : families) {
    const auto pts = sample_interior_points(p, 8, seed++);
    const auto h = check_hermitian(closed_eval(p), pts, 1e-11);
    const auto g = check_gram_psd(closed_eval(p), pts, 1e-8);
    o.require(h.passed, "hermitian " + family_descriptor(p).dump());
    o.require(g.passed, "gram " + family_descriptor(p).dump());
    worst_h = std::max(worst_h, h.measured);
    worst_g = std::max(worst_g, g.measured);
  }
  o.detail << "max_asym=" << worst_h << " tol=1e-11; max(-lmin/lmax)=" << worst_g << " tol=1e-8; "
           << families.size() << " families";
}

// 9. V_eta triple series and the a = 0 form
void veta_series(Outcome& o) {
  double worst_series = 0.0, worst_a0 = 0.0;
  const double eta = 1.0;
  const auto pts = sample_interior_points(VEtaParams{1, 1, {eta}, 0.0}, 20, 90, 0.6, 0.6);
  for (double a : {0.0, 0.5, 1.0}) {
    const VEtaParams p{1, 1, {eta}, a};
    for (std::size_t i = 0; i < pts.size(); i += 2) {
      const auto& x = pts[i];
      const auto& y = pts[i + 1];
      const complex u = x[0] * std::conj(y[0]), v = x[1] * std::conj(y[1]), t = x[2] * std::conj(y[2]);
      // contraction region: the geometric bound on the neglected tail is tiny
      o.require(std::abs(std::exp(eta * t) * u) + std::abs(v) < 0.5, "point outside the contraction region");
      complex brute = 0.0;
      for (int d = 0; d <= 40; ++d) {
        for (int ii = 0; ii <= d; ++ii) {
          for (int jj = 0; ii + jj <= d; ++jj) {
            const int kk = d - ii - jj;
            brute += std::pow(u, ii) * std::pow(v, jj) * std::pow(t, kk) / oracle::veta_moment_11(ii, jj, kk, eta, a);
          }
        }
      }
      const complex closed = kernel_veta(p, x, y).value;
      worst_series = std::max(worst_series, rel(closed, brute));
      if (a == 0.0) {
        const complex direct = oracle::veta_kernel_a0_11(x[0], x[1], x[2], y[0], y[1], y[2], eta);
        worst_a0 = std::max(worst_a0, rel(closed, direct));
      }
    }
  }
  o.require(worst_series <= 1e-6, "triple series disagreement above 1e-6");
  o.require(worst_a0 <= 1e-12, "a = 0 form disagreement above 1e-12");
  o.detail << "series max_rel=" << worst_series << " tol=1e-6 (degree <= 40, a in {0,0.5,1}); a=0 form max_rel="
           << worst_a0 << " tol=1e-12";
}

// 10. Determinism of Monte Carlo reports
void determinism(Outcome& o) {
  const auto first = to_json_lines(reproducing_mc());
  const auto second = to_json_lines(reproducing_mc());
  o.require(first == second, "library reports differ between runs");

  cli::RunConfig cfg;
  cfg.command = cli::Command::Verify;
  cfg.family = "dnm";
  cfg.params = {{"n", "1"}, {"m", "1"}};
  cfg.suite = "all";
  cfg.scheme = "mc";
  cfg.seed = 42;
  cfg.samples = 5000;
  cfg.degree = 2;
  cfg.num_points = 4;
  const auto a = cli::cmd_verify(cfg);
  const auto b = cli::cmd_verify(cfg);
  cfg.format = "csv";
  const auto c = cli::cmd_verify(cfg);
  const auto d = cli::cmd_verify(cfg);
  o.require(a.text == b.text && a.exit_code == b.exit_code, "cli json output differs between runs");
  o.require(c.text == d.text, "cli csv output differs between runs");
  o.detail << "library " << first.size() << " bytes, cli json " << a.text.size() << " bytes, cli csv "
           << c.text.size() << " bytes identical on rerun";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
    double budget_s;
  };
  const std::vector<Criterion> criteria{
      {"fock_reduction", fock_reduction, 1.0},
      {"disc_kernel_from_quadrature_moments", disc_kernel, 10.0},
      {"dual_route_per_family", dual_route, 120.0},
      {"moments_closed_vs_quadrature", moments, 60.0},
      {"sphere_integral_monte_carlo", sphere, 0.0},
      {"reproducing_property", reproducing, 0.0},
      {"parseval_identity", parseval, 0.0},
      {"hermitian_and_gram_psd", hermitian_gram, 0.0},
      {"veta_triple_series", veta_series, 0.0},
      {"determinism", determinism, 0.0},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    o.detail.precision(3);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (criteria[i].budget_s > 0.0 && secs > criteria[i].budget_s) {
      o.pass = false;
      o.detail << "; runtime over " << criteria[i].budget_s << " s";
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %-38s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.str().c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
