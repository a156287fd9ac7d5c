#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace temprel {

struct SignificanceResult {
  std::string test;
  double statistic = 0.0;
  double p = 1.0;
  std::size_t n = 0;
  /// "exact" or "chi2" for McNemar, "t" for the paired t-test.
  std::string branch;
  std::uint64_t n01 = 0;
  std::uint64_t n10 = 0;
};

/// Below this many discordant pairs McNemar uses the exact binomial test.
inline constexpr std::uint64_t kMcNemarExactThreshold = 25;

/// n01: a wrong, b right; n10: a right, b wrong.
SignificanceResult mcnemar_counts(std::uint64_t n01, std::uint64_t n10, std::size_t n = 0);
/// Throws DataError(Precondition) on a length mismatch.
SignificanceResult mcnemar(const std::vector<bool>& correct_a, const std::vector<bool>& correct_b);

/// Two-sided paired t-test on xs - ys. Throws DataError(Precondition) for
/// mismatched lengths or n < 2. Zero spread gives p = 1 for a zero mean and
/// p = 0 otherwise.
SignificanceResult paired_t(std::span<const double> xs, std::span<const double> ys);

/// Two-sided tail of Student's t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

nlohmann::json to_json(const SignificanceResult& r);

}  // namespace temprel
