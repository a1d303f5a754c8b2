#include <cmath>
#include <limits>
#include <string>

#include "fdbench/error.hpp"
#include "fdbench/evaluate.hpp"

namespace fdbench {

namespace {

// Continued fraction for I_x(a, b), evaluated with the modified Lentz method.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1, d = 1 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1) < kEps) return h;
  }
  throw RuntimeError("incomplete_beta: continued fraction did not converge");
}

double mean_of(std::span<const double> v) {
  double s = 0;
  for (double e : v) s += e;
  return s / static_cast<double>(v.size());
}

// Sum of squared deviations from the mean.
double ss_of(std::span<const double> v, double mean) {
  double s = 0;
  for (double e : v) s += (e - mean) * (e - mean);
  return s;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw InvalidArgument("incomplete_beta: a and b must be positive");
  if (std::isnan(x) || x < 0 || x > 1) throw InvalidArgument("incomplete_beta: x outside [0, 1]");
  if (x == 0) return 0;
  if (x == 1) return 1;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1) / (a + b + 2)) return front * beta_continued_fraction(a, b, x) / a;
  return 1 - front * beta_continued_fraction(b, a, 1 - x) / b;
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0)) throw InvalidArgument("student_t_two_sided: df must be positive");
  if (std::isnan(t)) throw InvalidArgument("student_t_two_sided: t is NaN");
  if (std::isinf(t)) return 0;
  return incomplete_beta(df / 2, 0.5, df / (df + t * t));
}

double pearson_p(double rho, std::size_t n) {
  if (n < 3) throw InvalidArgument("pearson_p: need at least 3 pairs");
  if (std::isnan(rho) || rho < -1 || rho > 1) throw InvalidArgument("pearson_p: rho outside [-1, 1]");
  if (std::abs(rho) == 1) return 0;
  const double df = static_cast<double>(n) - 2;
  const double t = rho * std::sqrt(df / (1 - rho * rho));
  return student_t_two_sided(t, df);
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: vectors differ in length");
  if (x.size() < 3) throw InvalidArgument("pearson: need at least 3 pairs");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my);
  const double sxx = ss_of(x, mx), syy = ss_of(y, my);
  if (sxx == 0 || syy == 0) throw InvalidArgument("pearson: constant vector");
  double rho = sxy / std::sqrt(sxx * syy);
  rho = std::max(-1.0, std::min(1.0, rho));
  return {rho, pearson_p(rho, x.size()), x.size()};
}

TTest t_test(std::span<const double> a, std::span<const double> b, TTestMode mode) {
  double diff = 0, se = 0, df = 0;
  if (mode == TTestMode::kPaired) {
    if (a.size() != b.size()) throw InvalidArgument("t_test: paired samples differ in length");
    if (a.size() < 3) throw InvalidArgument("t_test: paired test needs at least 3 pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double n = static_cast<double>(d.size());
    diff = mean_of(d);
    se = std::sqrt(ss_of(d, diff) / (n - 1) / n);
    df = n - 1;
  } else {
    if (a.size() < 2 || b.size() < 2) {
      throw InvalidArgument("t_test: two-sample test needs at least 2 values per sample");
    }
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = mean_of(a), mb = mean_of(b);
    diff = ma - mb;
    df = na + nb - 2;
    const double pooled = (ss_of(a, ma) + ss_of(b, mb)) / df;
    se = std::sqrt(pooled * (1 / na + 1 / nb));
  }
  if (se == 0) {
    if (diff == 0) return {0, df, 1};
    throw InvalidArgument("t_test: zero variance with a non-zero mean difference");
  }
  const double t = diff / se;
  return {t, df, student_t_two_sided(t, df)};
}

}  // namespace fdbench
