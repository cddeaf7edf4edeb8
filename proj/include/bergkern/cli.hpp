#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bergkern/closed_kernels.hpp"
#include "bergkern/core_types.hpp"
#include "bergkern/verify.hpp"

namespace bergkern::cli {

enum class Command { Moments, Eval, Verify, Compare };
std::string to_string(Command c);

using PointPair = std::pair<ComplexPoint, ComplexPoint>;

struct RunConfig {
  Command command = Command::Eval;
  /// cn, dnm, veta, disc, ball, polydisc or custom
  std::string family = "cn";
  std::map<std::string, std::string> params;
  std::vector<PointPair> points;
  std::string points_file;
  std::string weight_file;
  int degree = 4;
  std::optional<double> tol;
  int max_degree = kDefaultMaxDegree;
  std::optional<std::uint64_t> seed;
  std::string format = "json";
  std::string out_path;
  /// verify: cross_validate, reproducing, orthogonality, parseval, hermitian, gram or all
  std::string suite = "cross_validate";
  /// verify: quadrature or mc
  std::string scheme = "quadrature";
  std::size_t samples = 200000;
  int num_points = 10;
  bool skip_quadrature = false;
};

/// Weight, shadow and (when available) the closed-form kernel of a config.
struct Problem {
  std::string name;
  RadialWeight weight;
  ShadowRegion shadow;
  std::optional<FamilyParams> family;
  /// Closed-form kernel, if the domain has one.
  std::function<KernelValue(const ComplexPoint&, const ComplexPoint&)> closed;
  nlohmann::json descriptor;
};

/// Validates parameters before any computation; throws ArgumentError.
Problem build_problem(const RunConfig& cfg);

/// phi = scale * exp(-sum_k c_k prod_j r_j^{p_kj}) with a ball, polydisc or
/// orthant shadow:
/// {"name": ..., "arity": n, "scale": s, "terms": [{"coeff": c, "powers": [...]}],
///  "shadow": {"kind": "ball", "radius": R} | {"kind": "polydisc", "radii": [...]} | {"kind": "orthant"}}
Problem custom_problem(const nlohmann::json& spec);

/// One pair per line: 2n whitespace-separated "re,im" tokens (x then y).
/// Blank lines and lines starting with '#' are skipped.
std::vector<PointPair> parse_points(std::istream& in, int arity);

/// Applies a JSON config on top of cfg. Keys that were also given on the
/// command line (listed in `explicit_keys`) are overridden with a warning.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j, const std::vector<std::string>& explicit_keys,
                       std::ostream& warnings);

struct CommandOutput {
  std::string text;
  int exit_code = 0;
};

CommandOutput cmd_moments(const RunConfig& cfg);
CommandOutput cmd_eval(const RunConfig& cfg);
CommandOutput cmd_verify(const RunConfig& cfg);
CommandOutput cmd_compare(const RunConfig& cfg);

/// Full command line entry point. Exit 2 on configuration errors.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace bergkern::cli
