#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oamfso/rng.hpp"

namespace oamfso {

// Generalized Gamma distribution
//   f(i) = c i^(ac-1) exp(-(i/b)^c) / (b^(ac) Gamma(a)),  i > 0.
// c = 1 gives the Gamma law, a = 1 the Weibull law, a = c = 1 the exponential.
struct GgdParams {
  double a = 1.0;  // shape
  double b = 1.0;  // scale
  double c = 1.0;  // shape

  void validate() const;
  // Distribution of lambda * I.
  GgdParams scaled(double lambda) const { return {a, b * lambda, c}; }
};

struct FitReport {
  GgdParams params;
  double log_likelihood = 0.0;
  double mse = 0.0;
  std::size_t n_samples = 0;
  bool converged = false;
};

namespace ggd {

double log_pdf(double i, const GgdParams& p);
double pdf(double i, const GgdParams& p);
// P(a, (i/b)^c), the regularized lower incomplete gamma reduction.
double cdf(double i, const GgdParams& p);
double quantile(double prob, const GgdParams& p);
double moment(double k, const GgdParams& p);

// E[exp(-s I)] by adaptive quadrature.
double laplace_transform(double s, const GgdParams& p);

struct SeriesResult {
  double value = 0.0;
  bool used_series = false;
  std::string notice;  // set when the quadrature fallback was taken
};

// Power series sum_k Gamma(a + k/c) (-b s)^k / (k! Gamma(a)). Only valid for
// c > 1, or c = 1 with b s < 1; elsewhere (or when cancellation would eat the
// precision) it falls back to laplace_transform and says so in notice.
SeriesResult laplace_series(double s, const GgdParams& p);

// Inverse-CDF sampling through the incomplete-gamma quantile.
std::vector<double> draw(const GgdParams& p, std::size_t n, Rng& rng);

double log_likelihood(std::span<const double> samples, const GgdParams& p);

// Tight, left-skewed self-channel histograms put the optimum at c in the
// hundreds, hence the wide upper end.
struct FitOptions {
  double c_min = 0.05;
  double c_max = 1000.0;
  int scan_points = 128;
};

// Profile-likelihood ML fit: for each c, a(c) and b(a, c) are closed-form and
// the remaining stationarity condition in c is solved by bracketed root
// finding over [c_min, c_max]. Throws NumericError for degenerate input
// (fewer than 50 samples, non-positive values, all samples equal). When no
// bracket exists, converged is false and params hold the best scanned point.
FitReport fit_ml(std::span<const double> samples, const FitOptions& opts = {});

// Mean squared distance between the rank/n empirical CDF and the model CDF.
double mse_fit(std::span<const double> samples, const GgdParams& p);

// Pearson coefficient. Throws NumericError on zero variance.
double correlation_coefficient(std::span<const double> x,
                               std::span<const double> y);

}  // namespace ggd

struct FitRow {
  int m = 0;
  int n = 0;
  FitReport report;
};

// Fit table "m, n, a, b, c, loglik, mse, n_samples" with "# oamfso" and
// "# digest" comment lines in front.
void write_fit_table(std::ostream& out, const std::vector<FitRow>& rows,
                     const std::string& digest);
std::vector<FitRow> read_fit_table(std::istream& in, std::string* digest);

}  // namespace oamfso
