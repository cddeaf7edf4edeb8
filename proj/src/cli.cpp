#include "bergkern/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "bergkern/errors.hpp"
#include "bergkern/moments.hpp"
#include "bergkern/parallel.hpp"
#include "bergkern/sampling.hpp"
#include "bergkern/series_kernel.hpp"

namespace bergkern::cli {

namespace {

using nlohmann::json;

constexpr const char* kMomentsSchema = "bergkern.moments.v1";
constexpr const char* kEvalSchema = "bergkern.eval.v1";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Parameter parsing

class ParamReader {
 public:
  explicit ParamReader(const std::map<std::string, std::string>& params) : params_(params) {}

  double real(const std::string& key, double fallback) {
    used_.insert(key);
    const auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    return parse_real(key, it->second);
  }

  int integer(const std::string& key, int fallback) {
    const double v = real(key, fallback);
    if (v != std::floor(v) || std::abs(v) > 1e6) throw ArgumentError("parameter '" + key + "' must be an integer");
    return static_cast<int>(v);
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback) {
    used_.insert(key);
    const auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_real(key, tok));
    if (out.empty()) throw ArgumentError("parameter '" + key + "' is empty");
    return out;
  }

  bool has(const std::string& key) const { return params_.count(key) > 0; }

  void reject_unknown(const std::string& family) const {
    for (const auto& [k, v] : params_) {
      if (!used_.count(k)) throw ArgumentError("unknown parameter '" + k + "' for family " + family);
    }
  }

 private:
  static double parse_real(const std::string& key, const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw ArgumentError("parameter '" + key + "' is not a number: '" + s + "'");
    }
    if (pos != s.size()) throw ArgumentError("parameter '" + key + "' is not a number: '" + s + "'");
    return v;
  }

  const std::map<std::string, std::string>& params_;
  std::set<std::string> used_;
};

Problem family_problem(const FamilyParams& p) {
  validate(p);
  Problem pr{family_name(p), family_weight(p), family_shadow(p), p, {}, family_descriptor(p)};
  auto kernel = std::make_shared<FamilyKernel>(p);
  pr.closed = [kernel](const ComplexPoint& x, const ComplexPoint& y) { return (*kernel)(x, y); };
  return pr;
}

Problem ball_problem(const std::string& name, int n, double radius) {
  if (n < 1) throw ArgumentError("ball: n must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ArgumentError("ball: radius must be positive and finite");
  Problem pr{name, RadialWeight::constant(n), ShadowRegion::ball(n, radius), std::nullopt, {}, {}};
  pr.descriptor = {{"family", name}, {"n", n}, {"radius", radius}};
  pr.closed = [n, radius](const ComplexPoint& x, const ComplexPoint& y) {
    return KernelValue{kernel_ball(n, radius, x, y), 0.0, 0, true};
  };
  return pr;
}

Problem polydisc_problem(std::vector<double> radii) {
  for (double r : radii) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ArgumentError("polydisc: radii must be positive and finite");
  }
  const int n = static_cast<int>(radii.size());
  Problem pr{"polydisc", RadialWeight::constant(n), ShadowRegion::polydisc(radii), std::nullopt, {}, {}};
  pr.descriptor = {{"family", "polydisc"}, {"radii", radii}};
  pr.closed = [radii](const ComplexPoint& x, const ComplexPoint& y) {
    require_same_arity(x.size(), radii.size(), "polydisc kernel");
    require_same_arity(y.size(), radii.size(), "polydisc kernel");
    complex k = 1.0;
    for (std::size_t j = 0; j < radii.size(); ++j) {
      k *= kernel_ball(1, radii[j], ComplexPoint{x[j]}, ComplexPoint{y[j]});
    }
    return KernelValue{k, 0.0, 0, true};
  };
  return pr;
}

// Kernel for verification: the closed form when available, otherwise the
// moment series (moments by quadrature for custom weights).
KernelEvaluator make_evaluator(const Problem& pr, const RunConfig& cfg) {
  if (pr.closed) {
    auto closed = pr.closed;
    return [closed](const ComplexPoint& x, const ComplexPoint& y) { return closed(x, y).value; };
  }
  auto table = std::make_shared<MomentTable>(pr.weight, pr.shadow);
  auto series = std::make_shared<KernelSeries>(table, cfg.max_degree);
  return [series](const ComplexPoint& x, const ComplexPoint& y) { return kernel_series_eval(*series, x, y).value; };
}

std::vector<ComplexPoint> random_interior(const Problem& pr, std::size_t count, std::uint64_t seed) {
  if (pr.family) return sample_interior_points(*pr.family, count, seed);
  const auto& sk = pr.shadow.kind();
  if (std::holds_alternative<BallShadow>(sk) || std::holds_alternative<PolydiscShadow>(sk)) {
    return sample_interior_points(pr.shadow, count, seed);
  }
  // unbounded custom shadow: points of the unit ball
  auto rng = make_stream(seed, 0);
  std::vector<ComplexPoint> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.emplace_back(uniform_in_complex_ball(rng, static_cast<std::size_t>(pr.weight.arity()), 1.0));
  }
  return out;
}

std::vector<PointPair> resolve_points(const RunConfig& cfg, const Problem& pr) {
  std::vector<PointPair> pts = cfg.points;
  if (!cfg.points_file.empty()) {
    std::ifstream in(cfg.points_file);
    if (!in) throw ArgumentError("cannot open points file '" + cfg.points_file + "'");
    auto more = parse_points(in, pr.weight.arity());
    pts.insert(pts.end(), more.begin(), more.end());
  }
  for (const auto& [x, y] : pts) {
    require_same_arity(x.size(), static_cast<std::size_t>(pr.weight.arity()), "point");
    require_same_arity(y.size(), static_cast<std::size_t>(pr.weight.arity()), "point");
  }
  return pts;
}

std::vector<PointPair> points_or_random(const RunConfig& cfg, const Problem& pr) {
  auto pts = resolve_points(cfg, pr);
  if (!pts.empty()) return pts;
  if (!cfg.seed) throw ArgumentError("no points given; pass --points or --seed to sample interior points");
  if (cfg.num_points < 1) throw ArgumentError("num_points must be positive");
  const auto raw = random_interior(pr, 2 * static_cast<std::size_t>(cfg.num_points), *cfg.seed);
  for (std::size_t i = 0; i + 1 < raw.size(); i += 2) pts.emplace_back(raw[i], raw[i + 1]);
  return pts;
}

json complex_json(complex c) { return {c.real(), c.imag()}; }

std::string point_token(const ComplexPoint& z) {
  std::string s;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (j) s += ' ';
    s += fmt(z[j].real()) + "," + fmt(z[j].imag());
  }
  return s;
}

void check_common(const RunConfig& cfg) {
  if (cfg.format != "json" && cfg.format != "csv") throw ArgumentError("format must be json or csv");
  if (cfg.degree < 0 || cfg.degree > 200) throw ArgumentError("degree must lie in [0, 200]");
  if (cfg.max_degree < 1 || cfg.max_degree > 2000) throw ArgumentError("max_degree must lie in [1, 2000]");
  if (cfg.tol && !(*cfg.tol > 0.0)) throw ArgumentError("tol must be positive");
}

std::string reports_text(const std::vector<VerificationReport>& reports, const std::string& format) {
  return format == "csv" ? to_csv(reports) : to_json_lines(reports);
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::Moments: return "moments";
    case Command::Eval: return "eval";
    case Command::Verify: return "verify";
    case Command::Compare: return "compare";
  }
  return "eval";
}

// ---------------------------------------------------------------------------
// Problems

Problem custom_problem(const json& spec) {
  if (!spec.is_object()) throw ArgumentError("custom weight file must hold a JSON object");
  const int n = spec.value("arity", 0);
  if (n < 1) throw ArgumentError("custom weight: arity must be a positive integer");
  const double scale = spec.value("scale", 1.0);
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("custom weight: scale must be positive");
  struct Term {
    double coeff;
    std::vector<double> powers;
  };
  std::vector<Term> terms;
  for (const auto& t : spec.value("terms", json::array())) {
    Term term{t.at("coeff").get<double>(), t.at("powers").get<std::vector<double>>()};
    if (static_cast<int>(term.powers.size()) != n) throw ArgumentError("custom weight: powers must have arity entries");
    for (double p : term.powers) {
      if (!(p >= 0.0)) throw ArgumentError("custom weight: powers must be nonnegative");
    }
    terms.push_back(std::move(term));
  }
  const std::string name = spec.value("name", std::string("custom"));
  auto fn = [terms](std::span<const double> r) {
    double e = 0.0;
    for (const auto& t : terms) {
      double prod = t.coeff;
      for (std::size_t j = 0; j < r.size(); ++j) prod *= t.powers[j] == 0.0 ? 1.0 : std::pow(r[j], t.powers[j]);
      e += prod;
    }
    return std::exp(-e);
  };
  const json sh = spec.value("shadow", json{{"kind", "ball"}, {"radius", 1.0}});
  const std::string kind = sh.value("kind", std::string());
  std::vector<double> bounds;
  std::function<bool(std::span<const double>)> pred;
  if (kind == "ball") {
    const double radius = sh.value("radius", 1.0);
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ArgumentError("custom shadow: radius must be positive");
    bounds.assign(static_cast<std::size_t>(n), radius);
    pred = [radius](std::span<const double> r) {
      double s = 0.0;
      for (double x : r) s += x * x;
      return s < radius * radius;
    };
  } else if (kind == "polydisc") {
    bounds = sh.at("radii").get<std::vector<double>>();
    if (static_cast<int>(bounds.size()) != n) throw ArgumentError("custom shadow: radii must have arity entries");
    for (double b : bounds) {
      if (!(b > 0.0) || !std::isfinite(b)) throw ArgumentError("custom shadow: radii must be positive");
    }
    pred = [](std::span<const double>) { return true; };
  } else if (kind == "orthant") {
    // integrability on C^n needs the exponent to grow; require a pure power in every axis
    for (int j = 0; j < n; ++j) {
      bool grows = false;
      for (const auto& t : terms) {
        bool pure = t.coeff > 0.0 && t.powers[static_cast<std::size_t>(j)] > 0.0;
        for (int k = 0; k < n && pure; ++k) pure = k == j || t.powers[static_cast<std::size_t>(k)] == 0.0;
        grows = grows || pure;
      }
      if (!grows) throw ArgumentError("custom weight on the orthant needs a positive pure power term in every axis");
    }
    bounds.assign(static_cast<std::size_t>(n), kInf);
    pred = [](std::span<const double>) { return true; };
  } else {
    throw ArgumentError("custom shadow kind must be ball, polydisc or orthant");
  }
  Problem pr{name,
             RadialWeight::custom(n, name, fn, spec).scaled(scale),
             ShadowRegion::custom(name + "_" + kind, bounds, pred),
             std::nullopt,
             {},
             {{"family", "custom"}, {"spec", spec}}};
  return pr;
}

Problem build_problem(const RunConfig& cfg) {
  ParamReader in(cfg.params);
  Problem pr = [&]() -> Problem {
    if (cfg.family == "cn") {
      CnParams p{in.integer("n", 1), in.real("mu1", 1.0), in.real("mu2", 2.0)};
      return family_problem(p);
    }
    if (cfg.family == "dnm") {
      DnmParams p{in.integer("n", 1), in.integer("m", 1), in.real("mu1", 1.0), in.real("mu2", 2.0),
                  in.real("eta", 0.0)};
      return family_problem(p);
    }
    if (cfg.family == "veta") {
      const int n = in.integer("n", 1);
      const int m = in.integer("m", 1);
      if (n < 1) throw ArgumentError("veta: n must be positive");
      auto eta = in.list("eta", std::vector<double>(static_cast<std::size_t>(n), 1.0));
      VEtaParams p{n, m, std::move(eta), in.real("a", 0.0)};
      return family_problem(p);
    }
    if (cfg.family == "disc") return ball_problem("disc", 1, in.real("radius", 1.0));
    if (cfg.family == "ball") return ball_problem("ball", in.integer("n", 2), in.real("radius", 1.0));
    if (cfg.family == "polydisc") return polydisc_problem(in.list("radii", {1.0, 1.0}));
    if (cfg.family == "custom") {
      if (cfg.weight_file.empty()) throw ArgumentError("family custom needs --weight-file");
      std::ifstream f(cfg.weight_file);
      if (!f) throw ArgumentError("cannot open weight file '" + cfg.weight_file + "'");
      json spec;
      try {
        spec = json::parse(f);
      } catch (const json::exception& e) {
        throw ArgumentError(std::string("weight file is not valid JSON: ") + e.what());
      }
      return custom_problem(spec);
    }
    throw ArgumentError("unknown family '" + cfg.family + "' (cn, dnm, veta, disc, ball, polydisc, custom)");
  }();
  in.reject_unknown(cfg.family);
  return pr;
}

std::vector<PointPair> parse_points(std::istream& in, int arity) {
  std::vector<PointPair> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<complex> coords;
    std::string tok;
    while (ls >> tok) {
      const auto comma = tok.find(',');
      try {
        std::size_t pos = 0;
        if (comma == std::string::npos) {
          const double re = std::stod(tok, &pos);
          if (pos != tok.size()) throw std::invalid_argument(tok);
          coords.emplace_back(re, 0.0);
        } else {
          const std::string a = tok.substr(0, comma), b = tok.substr(comma + 1);
          const double re = std::stod(a, &pos);
          if (pos != a.size()) throw std::invalid_argument(tok);
          const double im = std::stod(b, &pos);
          if (pos != b.size()) throw std::invalid_argument(tok);
          coords.emplace_back(re, im);
        }
      } catch (const std::exception&) {
        throw ArgumentError("points line " + std::to_string(lineno) + ": bad coordinate '" + tok + "'");
      }
    }
    if (static_cast<int>(coords.size()) != 2 * arity) {
      throw ArgumentError("points line " + std::to_string(lineno) + ": expected " + std::to_string(2 * arity) +
                          " coordinates, got " + std::to_string(coords.size()));
    }
    const auto mid = coords.begin() + arity;
    out.emplace_back(ComplexPoint(std::vector<complex>(coords.begin(), mid)),
                     ComplexPoint(std::vector<complex>(mid, coords.end())));
  }
  return out;
}

void apply_config_json(RunConfig& cfg, const json& j, const std::vector<std::string>& explicit_keys,
                       std::ostream& warnings) {
  if (!j.is_object()) throw ArgumentError("config file must hold a JSON object");
  const std::set<std::string> given(explicit_keys.begin(), explicit_keys.end());
  auto note = [&](const std::string& key) {
    if (given.count(key)) warnings << "warning: config file value for '" << key << "' overrides the command line\n";
  };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "family") {
        cfg.family = v.get<std::string>();
      } else if (key == "params") {
        for (const auto& [pk, pv] : v.items()) {
          std::string s;
          if (pv.is_string()) {
            s = pv.get<std::string>();
          } else if (pv.is_array()) {
            for (const auto& e : pv) s += (s.empty() ? "" : ",") + fmt(e.get<double>());
          } else {
            s = fmt(pv.get<double>());
          }
          const auto it = cfg.params.find(pk);
          if (it != cfg.params.end() && it->second != s) {
            warnings << "warning: config file value for parameter '" << pk << "' overrides the command line\n";
          }
          cfg.params[pk] = s;
        }
        continue;
      } else if (key == "points") {
        for (const auto& p : v) cfg.points.emplace_back(point_from_json(p.at("x")), point_from_json(p.at("y")));
      } else if (key == "points_file") {
        cfg.points_file = v.get<std::string>();
      } else if (key == "weight_file") {
        cfg.weight_file = v.get<std::string>();
      } else if (key == "degree") {
        cfg.degree = v.get<int>();
      } else if (key == "tol") {
        cfg.tol = v.get<double>();
      } else if (key == "max_degree") {
        cfg.max_degree = v.get<int>();
      } else if (key == "seed") {
        cfg.seed = v.get<std::uint64_t>();
      } else if (key == "format") {
        cfg.format = v.get<std::string>();
      } else if (key == "out") {
        cfg.out_path = v.get<std::string>();
      } else if (key == "suite") {
        cfg.suite = v.get<std::string>();
      } else if (key == "scheme") {
        cfg.scheme = v.get<std::string>();
      } else if (key == "samples") {
        cfg.samples = v.get<std::size_t>();
      } else if (key == "num_points") {
        cfg.num_points = v.get<int>();
      } else if (key == "skip_quadrature") {
        cfg.skip_quadrature = v.get<bool>();
      } else {
        throw ArgumentError("unknown config key '" + key + "'");
      }
      note(key);
    }
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Commands

CommandOutput cmd_moments(const RunConfig& cfg) {
  check_common(cfg);
  const Problem pr = build_problem(cfg);
  const bool custom = !pr.family && pr.shadow.is_custom();
  const double tol = cfg.tol.value_or(custom ? kDefaultCustomTol : kDefaultClosedCheckTol);
  if (!(tol > 1e-12 && tol < 1e-2)) throw ArgumentError("moments: tol must lie in (1e-12, 1e-2)");

  std::vector<MultiIndex> alphas;
  for (int d = 0; d <= cfg.degree; ++d) {
    for (auto& a : enumerate_degree_shell(pr.weight.arity(), d)) alphas.push_back(std::move(a));
  }

  struct Row {
    std::optional<double> closed;
    std::optional<QuadratureMoment> quad;
    std::optional<double> partial;
    std::string status = "ok";
  };
  const auto rows = parallel_map<Row>(alphas.size(), [&](std::size_t i) {
    Row row;
    row.closed = closed_form_log_moment(pr.weight, pr.shadow, alphas[i]);
    if (!cfg.skip_quadrature || !row.closed) {
      try {
        row.quad = moment_quadrature(pr.shadow, pr.weight, alphas[i], tol);
      } catch (const ConvergenceError& e) {
        row.partial = e.partial_value();
        row.status = "quadrature_not_converged";
      }
    }
    return row;
  });

  auto agreement = [](const Row& r) -> std::optional<double> {
    if (!r.closed || !r.quad) return std::nullopt;
    return std::abs(std::expm1(r.quad->log_value - *r.closed));
  };

  CommandOutput out;
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "#schema=" << kMomentsSchema << '\n';
    os << "alpha,degree,closed_log_moment,closed_moment,quadrature_log_moment,quadrature_moment,quadrature_abs_error,"
          "agreement,status\n";
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const Row& r = rows[i];
      std::string a;
      for (std::size_t j = 0; j < alphas[i].size(); ++j) a += (j ? ";" : "") + std::to_string(alphas[i][j]);
      os << a << ',' << alphas[i].degree() << ',';
      os << (r.closed ? fmt(*r.closed) + "," + fmt(std::exp(*r.closed)) : std::string(",")) << ',';
      if (r.quad) {
        os << fmt(r.quad->log_value) << ',' << fmt(std::exp(r.quad->log_value)) << ',' << fmt(r.quad->abs_error_estimate);
      } else if (r.partial) {
        os << ',' << fmt(*r.partial) << ',';
      } else {
        os << ",,";
      }
      const auto ag = agreement(r);
      os << ',' << (ag ? fmt(*ag) : "") << ',' << r.status << '\n';
    }
    out.text = os.str();
  } else {
    json entries = json::array();
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const Row& r = rows[i];
      json e{{"alpha", alphas[i].entries()}, {"status", r.status}};
      e["closed_form"] = r.closed ? json{{"log_value", *r.closed}, {"value", std::exp(*r.closed)}} : json(nullptr);
      if (r.quad) {
        e["quadrature"] = {{"log_value", r.quad->log_value},
                           {"value", std::exp(r.quad->log_value)},
                           {"abs_error_estimate", r.quad->abs_error_estimate},
                           {"converged", true}};
      } else if (r.partial) {
        e["quadrature"] = {{"log_value", nullptr}, {"value", *r.partial}, {"converged", false}};
      } else {
        e["quadrature"] = nullptr;
      }
      const auto ag = agreement(r);
      e["agreement"] = ag ? json(*ag) : json(nullptr);
      entries.push_back(std::move(e));
    }
    const json doc{{"schema", kMomentsSchema},        {"problem", pr.descriptor},
                   {"weight", pr.weight.descriptor()}, {"shadow", pr.shadow.descriptor()},
                   {"degree", cfg.degree},             {"quadrature_rel_tol", tol},
                   {"entries", entries}};
    out.text = doc.dump(2) + "\n";
  }
  return out;
}

CommandOutput cmd_eval(const RunConfig& cfg) {
  check_common(cfg);
  const Problem pr = build_problem(cfg);
  const auto pts = points_or_random(cfg, pr);
  const double series_tol = cfg.tol.value_or(kDefaultSeriesTol);
  auto table = std::make_shared<MomentTable>(pr.weight, pr.shadow);
  const KernelSeries series(table, cfg.max_degree);

  struct Row {
    std::string status = "ok";
    std::string message;
    std::optional<KernelValue> closed;
    std::optional<KernelValue> series;
  };
  const auto rows = parallel_map<Row>(pts.size(), [&](std::size_t i) {
    Row row;
    const auto& [x, y] = pts[i];
    if (!pr.shadow.contains(x) || !pr.shadow.contains(y)) {
      row.status = "exterior";
      row.message = "point lies outside the domain";
      return row;
    }
    try {
      if (pr.closed) row.closed = pr.closed(x, y);
      row.series = kernel_series_eval(series, x, y, series_tol);
      if (!row.series->converged) {
        row.status = "series_not_converged";
        row.message = "max_degree reached";
      }
    } catch (const std::exception& e) {
      row.status = "error";
      row.message = e.what();
    }
    return row;
  });

  auto discrepancy = [](const Row& r) -> std::optional<double> {
    if (!r.closed || !r.series) return std::nullopt;
    return std::abs(r.closed->value - r.series->value) / std::abs(r.closed->value);
  };

  CommandOutput out;
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "#schema=" << kEvalSchema << '\n';
    os << "index,status,x,y,closed_re,closed_im,series_re,series_im,discrepancy,truncation_estimate,degree_used,"
          "converged,message\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Row& r = rows[i];
      os << i << ',' << r.status << ",\"" << point_token(pts[i].first) << "\",\"" << point_token(pts[i].second)
         << "\",";
      os << (r.closed ? fmt(r.closed->value.real()) + "," + fmt(r.closed->value.imag()) : std::string(",")) << ',';
      os << (r.series ? fmt(r.series->value.real()) + "," + fmt(r.series->value.imag()) : std::string(",")) << ',';
      const auto d = discrepancy(r);
      os << (d ? fmt(*d) : "") << ',';
      if (r.series) {
        os << fmt(r.series->truncation_estimate) << ',' << r.series->degree_used << ','
           << (r.series->converged ? "true" : "false");
      } else {
        os << ",,";
      }
      std::string msg = r.message;
      for (auto& c : msg) {
        if (c == ',' || c == '\n') c = ' ';
      }
      os << ',' << msg << '\n';
    }
    out.text = os.str();
  } else {
    json rows_json = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Row& r = rows[i];
      json e{{"index", i}, {"status", r.status}, {"x", point_to_json(pts[i].first)}, {"y", point_to_json(pts[i].second)}};
      e["closed"] = r.closed ? complex_json(r.closed->value) : json(nullptr);
      if (r.series) {
        e["series"] = complex_json(r.series->value);
        e["truncation_estimate"] = r.series->truncation_estimate;
        e["degree_used"] = r.series->degree_used;
        e["converged"] = r.series->converged;
      } else {
        e["series"] = nullptr;
      }
      const auto d = discrepancy(r);
      e["discrepancy"] = d ? json(*d) : json(nullptr);
      if (!r.message.empty()) e["message"] = r.message;
      rows_json.push_back(std::move(e));
    }
    const json doc{{"schema", kEvalSchema},
                   {"problem", pr.descriptor},
                   {"series_rel_tol", series_tol},
                   {"max_degree", cfg.max_degree},
                   {"rows", rows_json}};
    out.text = doc.dump(2) + "\n";
  }
  return out;
}

CommandOutput cmd_verify(const RunConfig& cfg) {
  check_common(cfg);
  static const std::set<std::string> suites{"cross_validate", "reproducing", "orthogonality", "parseval",
                                            "hermitian",      "gram",        "all"};
  if (!suites.count(cfg.suite)) throw ArgumentError("unknown suite '" + cfg.suite + "'");
  if (cfg.scheme != "quadrature" && cfg.scheme != "mc") throw ArgumentError("scheme must be quadrature or mc");
  const bool mc = cfg.scheme == "mc";
  if (mc && !cfg.seed) throw ArgumentError("the mc scheme requires --seed");
  if (mc && cfg.samples < 2) throw ArgumentError("samples must be at least 2");
  if (cfg.degree > 10) throw ArgumentError("verify: degree must be at most 10");
  const std::uint64_t seed = cfg.seed.value_or(0);
  const Problem pr = build_problem(cfg);
  const int n = pr.weight.arity();
  const bool all = cfg.suite == "all";

  std::vector<std::function<std::vector<VerificationReport>()>> jobs;
  std::uint64_t stream = 0;
  auto scheme_for = [&](std::uint64_t s) -> Scheme {
    if (mc) return MonteCarloScheme{cfg.samples, seed, s, cfg.tol.value_or(0.0)};
    QuadratureScheme q;
    if (cfg.tol) q.tol = *cfg.tol;
    return q;
  };
  auto single = [](auto f) { return [f]() { return std::vector<VerificationReport>{f()}; }; };

  std::vector<MultiIndex> monomials;
  for (int d = 0; d <= cfg.degree; ++d) {
    for (auto& a : enumerate_degree_shell(n, d)) monomials.push_back(std::move(a));
  }
  std::vector<Polynomial> polys;
  for (const auto& a : monomials) polys.push_back(Polynomial{{a, complex(1.0)}});
  {
    auto rng = make_stream(seed, 0xB0B);
    for (int k = 0; k < 3; ++k) polys.push_back(random_sparse_polynomial(n, std::max(cfg.degree, 1), 3, rng));
  }

  if (cfg.suite == "cross_validate" || all) {
    if (!pr.family) {
      if (!all) throw ArgumentError("cross_validate needs one of the families cn, dnm, veta");
    } else {
      const double tol = cfg.tol.value_or(std::holds_alternative<VEtaParams>(*pr.family) ? 1e-6 : 1e-7);
      const auto fam = *pr.family;
      jobs.push_back([fam, tol, &cfg, seed]() {
        return cross_validate_family(fam, cfg.num_points, seed, tol, cfg.max_degree);
      });
    }
  }
  const KernelEvaluator kernel = (cfg.suite == "reproducing" || cfg.suite == "hermitian" || cfg.suite == "gram" || all)
                                     ? make_evaluator(pr, cfg)
                                     : KernelEvaluator{};
  if (cfg.suite == "reproducing" || all) {
    std::vector<ComplexPoint> z0s;
    for (const auto& p : resolve_points(cfg, pr)) z0s.push_back(p.first);
    if (z0s.empty()) z0s = random_interior(pr, 1, seed);
    for (const auto& z0 : z0s) {
      for (const auto& f : polys) {
        const Scheme s = scheme_for(stream++);
        jobs.push_back(single([=, &pr]() { return check_reproducing(kernel, pr.weight, pr.shadow, f, z0, s); }));
      }
    }
  }
  if (cfg.suite == "orthogonality" || all) {
    for (std::size_t i = 0; i < monomials.size(); ++i) {
      for (std::size_t j = i; j < monomials.size(); ++j) {
        const Scheme s = scheme_for(stream++);
        const auto a = monomials[i], b = monomials[j];
        jobs.push_back(single([=, &pr]() { return check_orthogonality(pr.weight, pr.shadow, a, b, s); }));
      }
    }
  }
  if (cfg.suite == "parseval" || all) {
    for (const auto& f : polys) {
      const Scheme s = scheme_for(stream++);
      jobs.push_back(single([=, &pr]() { return check_parseval(f, pr.weight, pr.shadow, s); }));
    }
  }
  if (cfg.suite == "hermitian" || cfg.suite == "gram" || all) {
    auto pts = resolve_points(cfg, pr);
    std::vector<ComplexPoint> sample;
    for (const auto& p : pts) {
      sample.push_back(p.first);
      sample.push_back(p.second);
    }
    if (sample.empty()) sample = random_interior(pr, 8, seed);
    if (sample.size() > 8) sample.resize(8);
    if (cfg.suite == "hermitian" || all) {
      const double tol = cfg.tol.value_or(1e-11);
      jobs.push_back(single([=]() { return check_hermitian(kernel, sample, tol); }));
    }
    if (cfg.suite == "gram" || all) {
      const double tol = cfg.tol.value_or(1e-8);
      jobs.push_back(single([=]() { return check_gram_psd(kernel, sample, tol); }));
    }
  }

  const auto batches = parallel_map<std::vector<VerificationReport>>(jobs.size(), [&](std::size_t i) { return jobs[i](); });
  std::vector<VerificationReport> reports;
  for (const auto& b : batches) reports.insert(reports.end(), b.begin(), b.end());
  return {reports_text(reports, cfg.format), exit_code(reports)};
}

CommandOutput cmd_compare(const RunConfig& cfg) {
  check_common(cfg);
  const Problem pr = build_problem(cfg);
  if (!pr.closed) throw ArgumentError("compare needs a family with a closed-form kernel");
  const auto pts = points_or_random(cfg, pr);
  const double tol = cfg.tol.value_or(1e-6);
  // moments by quadrature only: the fully numerical route against the closed form
  auto table = std::make_shared<MomentTable>(pr.weight, pr.shadow, kDefaultClosedCheckTol,
                                             MomentTable::Preference::QuadratureOnly);
  const KernelSeries series(table, cfg.max_degree);
  const auto reports = parallel_map<VerificationReport>(pts.size(), [&](std::size_t i) {
    const auto& [x, y] = pts[i];
    VerificationReport r;
    r.check_name = "compare";
    r.target = {{"problem", pr.descriptor}, {"x", point_to_json(x)}, {"y", point_to_json(y)}, {"index", i}};
    r.tolerance = tol;
    r.tolerance_origin = cfg.tol ? "user" : "compare_default";
    r.expected = 0.0;
    if (!pr.shadow.contains(x) || !pr.shadow.contains(y)) {
      r.status = CheckStatus::Inconclusive;
      r.measured = 0.0;
      r.details = {{"message", "point lies outside the domain"}};
      r.finalize();
      return r;
    }
    try {
      const KernelValue kc = pr.closed(x, y);
      const KernelValue ks = kernel_series_eval(series, x, y);
      r.measured = std::abs(kc.value - ks.value) / std::abs(kc.value);
      r.samples_or_nodes = ks.degree_used;
      r.details = {{"closed", complex_json(kc.value)}, {"series", complex_json(ks.value)},
                   {"series_truncation_estimate", ks.truncation_estimate}};
      if (!ks.converged || !kc.converged) r.status = CheckStatus::Inconclusive;
    } catch (const ConvergenceError& e) {
      r.status = CheckStatus::Inconclusive;
      r.details = {{"message", e.what()}};
    }
    r.finalize();
    return r;
  });
  return {reports_text(reports, cfg.format), exit_code(reports)};
}

// ---------------------------------------------------------------------------
// Entry point

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted Bergman kernels on Reinhardt domains"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::vector<std::string> params;
  std::string config_path;
  double tol = 0.0;
  std::uint64_t seed = 0;

  struct Sub {
    CLI::App* app;
    Command command;
  };
  std::vector<Sub> subs{
      {app.add_subcommand("moments", "moment table for |alpha| <= degree, closed form and quadrature"), Command::Moments},
      {app.add_subcommand("eval", "kernel values at point pairs, closed form and series"), Command::Eval},
      {app.add_subcommand("verify", "run a verification suite"), Command::Verify},
      {app.add_subcommand("compare", "closed kernel against the series with quadrature moments"), Command::Compare}};

  std::map<std::string, std::vector<CLI::Option*>> opts;
  for (auto& s : subs) {
    auto* a = s.app;
    opts["family"].push_back(a->add_option("--family", cfg.family, "cn, dnm, veta, disc, ball, polydisc or custom"));
    opts["params"].push_back(a->add_option("--params", params, "family parameters as key=value"));
    opts["degree"].push_back(a->add_option("--degree", cfg.degree, "degree bound"));
    opts["tol"].push_back(a->add_option("--tol", tol, "tolerance"));
    opts["seed"].push_back(a->add_option("--seed", seed, "random seed"));
    opts["points_file"].push_back(a->add_option("--points", cfg.points_file, "points file"));
    opts["out"].push_back(a->add_option("--out", cfg.out_path, "output file (default stdout)"));
    opts["format"].push_back(a->add_option("--format", cfg.format, "json or csv"));
    opts["max_degree"].push_back(a->add_option("--max-degree", cfg.max_degree, "series degree budget"));
    opts["weight_file"].push_back(a->add_option("--weight-file", cfg.weight_file, "custom weight JSON"));
    opts["num_points"].push_back(a->add_option("--num-points", cfg.num_points, "random point pairs when none given"));
    a->add_option("--config", config_path, "JSON config; its values win over flags");
  }
  auto* verify = subs[2].app;
  opts["suite"].push_back(verify->add_option("--suite", cfg.suite, "verification suite"));
  opts["scheme"].push_back(verify->add_option("--scheme", cfg.scheme, "quadrature or mc"));
  opts["samples"].push_back(verify->add_option("--samples", cfg.samples, "Monte Carlo samples per check"));
  opts["skip_quadrature"].push_back(
      subs[0].app->add_flag("--skip-quadrature", cfg.skip_quadrature, "closed form only where available"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& s : subs) {
      if (s.app->parsed()) cfg.command = s.command;
    }
    std::vector<std::string> explicit_keys;
    for (const auto& [key, list] : opts) {
      for (auto* o : list) {
        if (o->count() > 0) {
          explicit_keys.push_back(key);
          break;
        }
      }
    }
    auto given = [&](const std::string& k) {
      return std::find(explicit_keys.begin(), explicit_keys.end(), k) != explicit_keys.end();
    };
    if (given("tol")) cfg.tol = tol;
    if (given("seed")) cfg.seed = seed;
    for (const auto& p : params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0) throw ArgumentError("--params expects key=value, got '" + p + "'");
      cfg.params[p.substr(0, eq)] = p.substr(eq + 1);
    }
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ArgumentError("cannot open config file '" + config_path + "'");
      json j;
      try {
        j = json::parse(f);
      } catch (const json::exception& e) {
        throw ArgumentError(std::string("config file is not valid JSON: ") + e.what());
      }
      apply_config_json(cfg, j, explicit_keys, err);
    }

    CommandOutput result;
    switch (cfg.command) {
      case Command::Moments: result = cmd_moments(cfg); break;
      case Command::Eval: result = cmd_eval(cfg); break;
      case Command::Verify: result = cmd_verify(cfg); break;
      case Command::Compare: result = cmd_compare(cfg); break;
    }
    if (cfg.out_path.empty()) {
      out << result.text;
    } else {
      std::ofstream f(cfg.out_path, std::ios::binary);
      if (!f) throw ArgumentError("cannot write output file '" + cfg.out_path + "'");
      f << result.text;
    }
    return result.exit_code;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace bergkern::cli
