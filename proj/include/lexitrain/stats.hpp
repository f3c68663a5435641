#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace lexitrain::stats {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double value) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// Arithmetic mean of 1..5 ratings. Throws EmptyInput / OutOfRangeRating.
double weighted_mean(std::span<const int> ratings);

// Same mean from a frequency table: counts[k] responses rated k + 1.
double weighted_mean_from_counts(std::span<const int> counts);

struct LikertBand {
  double lower = 0.0;
  double upper = 0.0;
  std::string label;
};

// Five-point descriptive scale. Printed band edges leave gaps (4.59 | 4.60);
// a mean belongs to the band with the greatest lower bound not above it.
class LikertScale {
 public:
  explicit LikertScale(std::vector<LikertBand> bands);

  // 4.60-5.00 Excellent, 3.60-4.59 Very Good, 2.60-3.59 Good,
  // 1.60-2.59 Fair, 1.00-1.59 Poor.
  static const LikertScale& standard();

  // Throws Error{OutOfRange} outside [lowest lower, highest upper].
  const std::string& band(double mean) const;
  const std::vector<LikertBand>& bands() const noexcept { return bands_; }

 private:
  std::vector<LikertBand> bands_;  // descending by lower bound
};

const std::string& likert_band(double mean, const LikertScale& scale = LikertScale::standard());

struct GroupSummary {
  long n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1 denominator)
};

GroupSummary summarize(std::span<const double> scores);

struct AnovaResult {
  double f = 0.0;
  long df_between = 0;
  long df_within = 0;
  double p = 1.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  // Set when every group is constant but the means differ: F is +inf, p = 0.
  bool zero_within_variance = false;
};

// Throws DegenerateInput (k < 2 or a group with n < 2) and ZeroWithinVariance
// (every score identical, F undefined).
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);
AnovaResult anova_from_summary(std::span<const GroupSummary> summaries);

// Regularized incomplete beta I_x(a, b). Throws NonConvergence if the
// continued fraction does not settle.
double regularized_beta(double a, double b, double x);

// CDF of the F(d1, d2) distribution and its upper tail.
double f_cdf(double x, long d1, long d2);
double f_survival(double x, long d1, long d2);

// "n,mean,sd;n,mean,sd;..." as accepted by the CLI.
std::vector<GroupSummary> parse_group_summaries(std::string_view text);

struct SurveyResponse {
  std::string group;
  std::string criterion;
  int rating = 0;
};

// CSV with header "group,criterion,rating"; one row per rating.
std::vector<SurveyResponse> parse_survey_csv(std::istream& in);

struct CriterionAnalysis {
  std::string criterion;
  GroupSummary overall;
  std::string band;
  std::vector<std::pair<std::string, GroupSummary>> groups;  // first-appearance order
  AnovaResult anova;
};

// Criteria and groups keep their order of first appearance.
std::vector<CriterionAnalysis> analyze_survey(std::span<const SurveyResponse> responses);

// Criteria | Mean | SD | df | F | Sig. laid out with between/within/total df rows.
std::string format_anova_table(std::span<const CriterionAnalysis> rows);

nlohmann::json anova_to_json(const AnovaResult& result);
nlohmann::json analysis_to_json(const CriterionAnalysis& analysis);

}  // namespace lexitrain::stats
