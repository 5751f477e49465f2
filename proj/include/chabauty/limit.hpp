#pragma once

// Conjugacy limits lim g_n H g_n^-1: closed-form predictions from the
// asymptotic profile of g_n, numerical estimation on point clouds, and
// classification of the numerical limit against the catalog.

#include "chabauty/grassmannian.hpp"
#include "chabauty/metric.hpp"
#include "chabauty/sequence.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chabauty {

class IndeterminateProfile : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Predicted limit and the case of the analysis that produced it.
struct OracleResult {
  SubgroupDescriptor limit;
  std::string rule;
};

// Each oracle takes the profile of g_n = (u(s_n) diag(a_n, 1/a_n), (alpha_n, beta_n))
// acting on the unconjugated base subgroup and throws IndeterminateProfile when
// the profile falls outside the case analysis.
OracleResult oracle_levi(const AsymptoticProfile& p);
OracleResult oracle_compact(const AsymptoticProfile& p);
OracleResult oracle_diagonal(const AsymptoticProfile& p);
OracleResult oracle_borel(const AsymptoticProfile& p);
OracleResult oracle_unipotent(const AsymptoticProfile& p);

/// Dispatches on the base family and applies the outer conjugator.
OracleResult oracle_for(const SequenceSpec& s);

/// Best catalog member (bounded conjugator) for a cloud.
struct Match {
  SubgroupDescriptor descriptor;
  double distance = 0;       // chabauty_dist to the cloud
  double algebra_fit = 0;    // grass_dist of the fitted Lie algebra
};

struct ClassifyOptions {
  /// Restrict to these families; empty means every family of the estimated dimension.
  std::vector<Family> families;
};

/// Estimates the Lie algebra of the cloud, fits every candidate family of the
/// same dimension by aligning Lie algebras over a bounded conjugator box, and
/// returns the candidates sorted by chabauty_dist to the cloud.
std::vector<Match> classify(const PointCloud& cloud, const MetricConfig& cfg,
                            const ClassifyOptions& opts = {});

/// Fits the conjugator and parameters of one family to a target Lie algebra.
Match fit_family(Family f, const Subspace& target);

struct LimitConfig {
  MetricConfig metric;
  std::vector<double> schedule{10, 100, 1000, 10000};
};

struct LimitStep {
  double n = 0;
  int dimension = 0;
  std::optional<Match> match;  // best catalog fit, if any
  double oracle_distance = -1;  // chabauty_dist of the cloud to the oracle limit, -1 if none
};

struct LimitReport {
  SequenceSpec spec;
  AsymptoticProfile profile;
  LimitConfig config;
  std::optional<OracleResult> oracle;
  std::string oracle_note;
  std::vector<LimitStep> steps;
  int limit_dimension = 0;
  int components = 0;
  bool cauchy = false;
  double cauchy_distance = 0;
  std::optional<Match> final_match;
  double match_to_oracle = -1;  // chabauty_dist(final match, oracle limit)
  PointCloud final_cloud;
  std::vector<std::string> warnings;

  /// Final match within 0.1 of the oracle limit.
  [[nodiscard]] bool agrees() const { return match_to_oracle >= 0 && match_to_oracle <= 0.1; }
  [[nodiscard]] nlohmann::json to_json() const;
  /// Rows "n,distance" of the distance-to-oracle curve.
  [[nodiscard]] std::string curve_csv() const;
};

/// Requires a schedule that is increasing and has at least 3 entries.
LimitReport estimate_limit(const SequenceSpec& s, const LimitConfig& cfg = {});

struct UnipotentCheck {
  bool applicable = false;  // divergent pure translation part
  bool vacuous = false;     // no small-translation elements in the final cloud
  bool pass = false;
  int checked = 0;
  double worst = 0;         // max |trace - 2|
};

/// Every element (g, v) of the final cloud with |v| <= 3 eps has |trace g - 2| <= 1e-3.
UnipotentCheck unipotent_limit_check(const LimitReport& r, const SequenceSpec& s);

/// Sequence specs from every *.json file in dir, sorted by file name.
std::vector<SequenceSpec> load_witnesses(const std::filesystem::path& dir);

}  // namespace chabauty
