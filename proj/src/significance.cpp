#include "temprel/significance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/beta.hpp>

#include "temprel/error.hpp"

namespace temprel {

SignificanceResult mcnemar_counts(std::uint64_t n01, std::uint64_t n10, std::size_t n) {
  SignificanceResult r;
  r.test = "mcnemar";
  r.n = n;
  r.n01 = n01;
  r.n10 = n10;
  const std::uint64_t m = n01 + n10;
  if (m < kMcNemarExactThreshold) {
    r.branch = "exact";
    const std::uint64_t k = std::min(n01, n10);
    r.statistic = static_cast<double>(k);
    // Sum C(m, i) / 2^m for i <= k in log space.
    double tail = 0.0;
    for (std::uint64_t i = 0; i <= k && m > 0; ++i) {
      const double lc = std::lgamma(m + 1.0) - std::lgamma(i + 1.0) - std::lgamma(m - i + 1.0);
      tail += std::exp(lc - static_cast<double>(m) * std::log(2.0));
    }
    r.p = m == 0 ? 1.0 : std::min(1.0, 2.0 * tail);
    return r;
  }
  r.branch = "chi2";
  const double diff = std::abs(static_cast<double>(n01) - static_cast<double>(n10)) - 1.0;
  r.statistic = diff * diff / static_cast<double>(m);
  r.p = std::erfc(std::sqrt(r.statistic / 2.0));
  return r;
}

SignificanceResult mcnemar(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size())
    throw DataError(DataErrorKind::Precondition,
                    "mcnemar: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                        " instances");
  std::uint64_t n01 = 0, n10 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i] && b[i]) ++n01;
    if (a[i] && !b[i]) ++n10;
  }
  return mcnemar_counts(n01, n10, a.size());
}

double student_t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
}

SignificanceResult paired_t(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw DataError(DataErrorKind::Precondition, "paired_t: length mismatch");
  const std::size_t n = xs.size();
  if (n < 2) throw DataError(DataErrorKind::Precondition, "paired_t needs at least 2 pairs");
  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = xs[i] - ys[i];
    mean += d[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  SignificanceResult r;
  r.test = "paired_t";
  r.branch = "t";
  r.n = n;
  if (sd == 0.0) {
    if (mean == 0.0) {
      r.statistic = 0.0;
      r.p = 1.0;
    } else {
      r.statistic = std::copysign(std::numeric_limits<double>::infinity(), mean);
      r.p = 0.0;
    }
    return r;
  }
  r.statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = student_t_two_sided(r.statistic, static_cast<double>(n - 1));
  return r;
}

nlohmann::json to_json(const SignificanceResult& r) {
  nlohmann::json j = {{"test", r.test}, {"p", r.p}, {"n", r.n}, {"branch", r.branch}};
  if (std::isfinite(r.statistic)) j["statistic"] = r.statistic;
  else j["statistic"] = r.statistic > 0 ? "inf" : "-inf";
  if (r.test == "mcnemar") {
    j["n01"] = r.n01;
    j["n10"] = r.n10;
    j["exact_threshold"] = kMcNemarExactThreshold;
  }
  return j;
}

}  // namespace temprel
