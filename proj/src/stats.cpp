#include "lexitrain/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <sstream>

#include "lexitrain/errors.hpp"

namespace lexitrain::stats {

namespace {

std::string trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

std::vector<std::string> split(std::string_view text, char separator) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto end = text.find(separator, start);
    parts.push_back(trim(text.substr(start, end == std::string_view::npos ? end : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    double value = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(value)) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidRequest, "cannot read " + what + " from '" + text + "'");
  }
}

// Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEpsilon = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) <= kEpsilon) return h;
  }
  throw Error(ErrorCode::NonConvergence, "incomplete beta continued fraction did not converge",
              {{"a", a}, {"b", b}, {"x", x}});
}

// I_x(a, b) with y = 1 - x supplied separately to keep the small tail exact.
double incomplete_beta(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

void check_f_arguments(double x, long d1, long d2) {
  if (d1 < 1 || d2 < 1) {
    throw Error(ErrorCode::OutOfRange, "F distribution degrees of freedom must be positive",
                {{"d1", d1}, {"d2", d2}});
  }
  if (std::isnan(x) || x < 0.0) {
    throw Error(ErrorCode::OutOfRange, "F distribution argument must be non-negative");
  }
}

AnovaResult finish(double ss_between, double ss_within, long k, long total) {
  AnovaResult result;
  result.ss_between = ss_between;
  result.ss_within = ss_within;
  result.df_between = k - 1;
  result.df_within = total - k;
  if (ss_within <= 0.0) {
    if (ss_between <= 0.0) {
      throw Error(ErrorCode::ZeroWithinVariance,
                  "all scores are identical; the F ratio is undefined");
    }
    result.f = std::numeric_limits<double>::infinity();
    result.p = 0.0;
    result.zero_within_variance = true;
    return result;
  }
  const double ms_between = ss_between / static_cast<double>(result.df_between);
  const double ms_within = ss_within / static_cast<double>(result.df_within);
  result.f = ms_between / ms_within;
  result.p = f_survival(result.f, result.df_between, result.df_within);
  return result;
}

std::string sig_text(double p) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << p;
  std::string text = out.str();
  if (text.rfind("0.", 0) == 0) text.erase(0, 1);
  return text;
}

}  // namespace

void CompensatedSum::add(double value) noexcept {
  const double t = sum_ + value;
  if (std::fabs(sum_) >= std::fabs(value)) {
    compensation_ += (sum_ - t) + value;
  } else {
    compensation_ += (value - t) + sum_;
  }
  sum_ = t;
}

double weighted_mean(std::span<const int> ratings) {
  if (ratings.empty()) throw Error(ErrorCode::EmptyInput, "no ratings supplied");
  long long total = 0;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    if (ratings[i] < 1 || ratings[i] > 5) {
      throw Error(ErrorCode::OutOfRangeRating,
                  "rating " + std::to_string(ratings[i]) + " at position " + std::to_string(i) +
                      " is outside 1..5");
    }
    total += ratings[i];
  }
  return static_cast<double>(total) / static_cast<double>(ratings.size());
}

double weighted_mean_from_counts(std::span<const int> counts) {
  if (counts.size() != 5) {
    throw Error(ErrorCode::OutOfRangeRating, "a five-point frequency table needs exactly 5 counts");
  }
  long long responses = 0;
  long long weighted = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 0) throw Error(ErrorCode::OutOfRangeRating, "negative frequency");
    responses += counts[k];
    weighted += static_cast<long long>(k + 1) * counts[k];
  }
  if (responses == 0) throw Error(ErrorCode::EmptyInput, "no ratings supplied");
  return static_cast<double>(weighted) / static_cast<double>(responses);
}

LikertScale::LikertScale(std::vector<LikertBand> bands) : bands_(std::move(bands)) {
  if (bands_.empty()) throw Error(ErrorCode::InvalidRequest, "a Likert scale needs at least one band");
  std::sort(bands_.begin(), bands_.end(),
            [](const LikertBand& a, const LikertBand& b) { return a.lower > b.lower; });
}

const LikertScale& LikertScale::standard() {
  static const LikertScale scale({{4.60, 5.00, "Excellent"},
                                  {3.60, 4.59, "Very Good"},
                                  {2.60, 3.59, "Good"},
                                  {1.60, 2.59, "Fair"},
                                  {1.00, 1.59, "Poor"}});
  return scale;
}

const std::string& LikertScale::band(double mean) const {
  // Absorbs representation error in computed means such as 483.0 / 105.0.
  constexpr double kSlack = 1e-9;
  const double top = bands_.front().upper;
  const double bottom = bands_.back().lower;
  if (std::isnan(mean) || mean > top + kSlack || mean < bottom - kSlack) {
    std::ostringstream message;
    message << "mean " << mean << " is outside the scale [" << bottom << ", " << top << "]";
    throw Error(ErrorCode::OutOfRange, message.str());
  }
  for (const auto& entry : bands_) {
    if (mean + kSlack >= entry.lower) return entry.label;
  }
  return bands_.back().label;
}

const std::string& likert_band(double mean, const LikertScale& scale) { return scale.band(mean); }

GroupSummary summarize(std::span<const double> scores) {
  GroupSummary summary;
  summary.n = static_cast<long>(scores.size());
  if (scores.empty()) return summary;
  CompensatedSum sum;
  for (double x : scores) sum.add(x);
  summary.mean = sum.value() / static_cast<double>(scores.size());
  if (scores.size() > 1) {
    CompensatedSum squares;
    for (double x : scores) squares.add((x - summary.mean) * (x - summary.mean));
    summary.sd = std::sqrt(squares.value() / static_cast<double>(scores.size() - 1));
  }
  return summary;
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) {
    throw Error(ErrorCode::DegenerateInput, "one-way ANOVA needs at least two groups",
                {{"groups", groups.size()}});
  }
  std::vector<double> means;
  CompensatedSum grand;
  long total = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() < 2) {
      throw Error(ErrorCode::DegenerateInput,
                  "group " + std::to_string(g) + " has fewer than two observations",
                  {{"group", g}, {"n", groups[g].size()}});
    }
    CompensatedSum sum;
    for (double x : groups[g]) {
      sum.add(x);
      grand.add(x);
    }
    means.push_back(sum.value() / static_cast<double>(groups[g].size()));
    total += static_cast<long>(groups[g].size());
  }
  const double grand_mean = grand.value() / static_cast<double>(total);

  CompensatedSum between;
  CompensatedSum within;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double shift = means[g] - grand_mean;
    between.add(static_cast<double>(groups[g].size()) * shift * shift);
    for (double x : groups[g]) within.add((x - means[g]) * (x - means[g]));
  }
  return finish(between.value(), within.value(), static_cast<long>(groups.size()), total);
}

AnovaResult anova_from_summary(std::span<const GroupSummary> summaries) {
  if (summaries.size() < 2) {
    throw Error(ErrorCode::DegenerateInput, "one-way ANOVA needs at least two groups",
                {{"groups", summaries.size()}});
  }
  CompensatedSum weighted;
  long total = 0;
  for (std::size_t g = 0; g < summaries.size(); ++g) {
    const auto& s = summaries[g];
    if (s.n < 2 || s.sd < 0.0 || !std::isfinite(s.mean) || !std::isfinite(s.sd)) {
      throw Error(ErrorCode::DegenerateInput,
                  "group " + std::to_string(g) + " needs n >= 2 and a finite, non-negative sd",
                  {{"group", g}, {"n", s.n}});
    }
    weighted.add(static_cast<double>(s.n) * s.mean);
    total += s.n;
  }
  const double grand_mean = weighted.value() / static_cast<double>(total);
  CompensatedSum between;
  CompensatedSum within;
  for (const auto& s : summaries) {
    const double shift = s.mean - grand_mean;
    between.add(static_cast<double>(s.n) * shift * shift);
    within.add(static_cast<double>(s.n - 1) * s.sd * s.sd);
  }
  return finish(between.value(), within.value(), static_cast<long>(summaries.size()), total);
}

double regularized_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || std::isnan(x) || x < 0.0 || x > 1.0) {
    throw Error(ErrorCode::OutOfRange, "regularized beta needs a, b > 0 and x in [0, 1]");
  }
  return incomplete_beta(a, b, x, 1.0 - x);
}

double f_cdf(double x, long d1, long d2) {
  check_f_arguments(x, d1, d2);
  if (std::isinf(x)) return 1.0;
  const double scaled = static_cast<double>(d1) * x;
  const double denominator = scaled + static_cast<double>(d2);
  return incomplete_beta(0.5 * static_cast<double>(d1), 0.5 * static_cast<double>(d2), scaled / denominator,
                         static_cast<double>(d2) / denominator);
}

double f_survival(double x, long d1, long d2) {
  check_f_arguments(x, d1, d2);
  if (std::isinf(x)) return 0.0;
  const double scaled = static_cast<double>(d1) * x;
  const double denominator = scaled + static_cast<double>(d2);
  return incomplete_beta(0.5 * static_cast<double>(d2), 0.5 * static_cast<double>(d1),
                         static_cast<double>(d2) / denominator, scaled / denominator);
}

std::vector<GroupSummary> parse_group_summaries(std::string_view text) {
  std::vector<GroupSummary> summaries;
  for (const auto& group : split(text, ';')) {
    if (group.empty()) continue;
    const auto fields = split(group, ',');
    if (fields.size() != 3) {
      throw Error(ErrorCode::InvalidRequest, "group '" + group + "' must be n,mean,sd");
    }
    GroupSummary s;
    const double n = parse_number(fields[0], "n");
    if (n != std::floor(n)) throw Error(ErrorCode::InvalidRequest, "n must be an integer in '" + group + "'");
    s.n = static_cast<long>(n);
    s.mean = parse_number(fields[1], "mean");
    s.sd = parse_number(fields[2], "sd");
    summaries.push_back(s);
  }
  return summaries;
}

std::vector<SurveyResponse> parse_survey_csv(std::istream& in) {
  std::vector<SurveyResponse> responses;
  std::string line;
  std::size_t line_number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = split(trimmed, ',');
    if (!header_seen) {
      header_seen = true;
      if (fields.size() == 3 && fields[0] == "group" && fields[1] == "criterion" && fields[2] == "rating") {
        continue;
      }
    }
    if (fields.size() != 3) {
      throw Error(ErrorCode::InvalidRequest,
                  "line " + std::to_string(line_number) + ": expected group,criterion,rating");
    }
    const double rating = parse_number(fields[2], "rating on line " + std::to_string(line_number));
    if (rating != std::floor(rating) || rating < 1 || rating > 5) {
      throw Error(ErrorCode::OutOfRangeRating,
                  "line " + std::to_string(line_number) + ": rating must be an integer in 1..5");
    }
    responses.push_back({fields[0], fields[1], static_cast<int>(rating)});
  }
  if (responses.empty()) throw Error(ErrorCode::EmptyInput, "survey file has no ratings");
  return responses;
}

std::vector<CriterionAnalysis> analyze_survey(std::span<const SurveyResponse> responses) {
  std::vector<std::string> criteria;
  std::map<std::string, std::vector<std::string>> group_order;
  std::map<std::pair<std::string, std::string>, std::vector<double>> scores;
  for (const auto& r : responses) {
    if (std::find(criteria.begin(), criteria.end(), r.criterion) == criteria.end()) {
      criteria.push_back(r.criterion);
    }
    auto& groups = group_order[r.criterion];
    if (std::find(groups.begin(), groups.end(), r.group) == groups.end()) groups.push_back(r.group);
    scores[{r.criterion, r.group}].push_back(r.rating);
  }

  std::vector<CriterionAnalysis> out;
  for (const auto& criterion : criteria) {
    CriterionAnalysis analysis;
    analysis.criterion = criterion;
    std::vector<std::vector<double>> groups;
    std::vector<double> all;
    for (const auto& group : group_order[criterion]) {
      const auto& values = scores[{criterion, group}];
      analysis.groups.emplace_back(group, summarize(values));
      groups.push_back(values);
      all.insert(all.end(), values.begin(), values.end());
    }
    analysis.overall = summarize(all);
    analysis.band = likert_band(analysis.overall.mean);
    analysis.anova = one_way_anova(groups);
    out.push_back(std::move(analysis));
  }
  return out;
}

std::string format_anova_table(std::span<const CriterionAnalysis> rows) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "Criteria" << std::setw(10) << "Mean" << std::setw(10) << "SD"
      << std::setw(8) << "df" << std::setw(10) << "F" << "Sig.\n";
  for (const auto& row : rows) {
    const auto& a = row.anova;
    std::ostringstream mean;
    std::ostringstream sd;
    std::ostringstream f;
    mean << std::fixed << std::setprecision(4) << row.overall.mean;
    sd << std::fixed << std::setprecision(5) << row.overall.sd;
    if (a.zero_within_variance) {
      f << "inf";
    } else {
      f << std::fixed << std::setprecision(3) << a.f;
    }
    out << std::left << std::setw(16) << row.criterion << std::setw(10) << mean.str() << std::setw(10) << sd.str()
        << std::setw(8) << a.df_between << std::setw(10) << f.str() << sig_text(a.p) << "\n";
    out << std::setw(36) << "" << a.df_within << "\n";
    out << std::setw(36) << "" << (a.df_between + a.df_within) << "\n";
  }
  return out.str();
}

nlohmann::json anova_to_json(const AnovaResult& result) {
  nlohmann::json node{{"dfBetween", result.df_between},
                      {"dfWithin", result.df_within},
                      {"ssBetween", result.ss_between},
                      {"ssWithin", result.ss_within},
                      {"p", result.p},
                      {"zeroWithinVariance", result.zero_within_variance}};
  node["F"] = result.zero_within_variance ? nlohmann::json("inf") : nlohmann::json(result.f);
  return node;
}

nlohmann::json analysis_to_json(const CriterionAnalysis& analysis) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& [name, s] : analysis.groups) {
    groups.push_back({{"group", name}, {"n", s.n}, {"mean", s.mean}, {"sd", s.sd}});
  }
  return {{"criterion", analysis.criterion},
          {"n", analysis.overall.n},
          {"mean", analysis.overall.mean},
          {"sd", analysis.overall.sd},
          {"interpretation", analysis.band},
          {"groups", std::move(groups)},
          {"anova", anova_to_json(analysis.anova)}};
}

}  // namespace lexitrain::stats
