#include "oamfso/ggd.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "oamfso/errors.hpp"
#include "oamfso/numerics.hpp"

namespace oamfso {

void GgdParams::validate() const {
  auto ok = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!ok(a) || !ok(b) || !ok(c))
    throw std::invalid_argument("GgdParams: a, b, c must be positive and finite");
}

namespace ggd {

double log_pdf(double i, const GgdParams& p) {
  p.validate();
  if (!(i > 0.0)) throw std::domain_error("ggd::pdf: argument must be > 0");
  const double log_ratio = std::log(i / p.b);
  return std::log(p.c) + (p.a * p.c - 1.0) * std::log(i) - p.a * p.c * std::log(p.b) -
         std::exp(p.c * log_ratio) - std::lgamma(p.a);
}

double pdf(double i, const GgdParams& p) { return std::exp(log_pdf(i, p)); }

double cdf(double i, const GgdParams& p) {
  p.validate();
  if (!(i >= 0.0)) throw std::domain_error("ggd::cdf: argument must be >= 0");
  if (i == 0.0) return 0.0;
  if (std::isinf(i)) return 1.0;
  const double x = std::pow(i / p.b, p.c);
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(p.a, x);
}

double quantile(double prob, const GgdParams& p) {
  p.validate();
  if (!(prob >= 0.0 && prob <= 1.0))
    throw std::domain_error("ggd::quantile: probability outside [0, 1]");
  if (prob == 0.0) return 0.0;
  if (prob == 1.0) return std::numeric_limits<double>::infinity();
  return p.b * std::pow(boost::math::gamma_p_inv(p.a, prob), 1.0 / p.c);
}

double moment(double k, const GgdParams& p) {
  p.validate();
  if (!(k >= 0.0)) throw std::domain_error("ggd::moment: order must be >= 0");
  if (k == 0.0) return 1.0;
  return std::pow(p.b, k) * std::exp(std::lgamma(p.a + k / p.c) - std::lgamma(p.a));
}

double laplace_transform(double s, const GgdParams& p) {
  p.validate();
  if (!(s >= 0.0)) throw std::domain_error("ggd::laplace_transform: s must be >= 0");
  if (s == 0.0) return 1.0;
  // I = b T^(1/c) with T ~ Gamma(a, 1).
  const double sb = s * p.b;
  const double inv_c = 1.0 / p.c;
  const double hint = std::pow(1.0 / sb, p.c);
  const auto r = numerics::gamma_expectation(
      p.a, [&](double t) { return std::exp(-sb * std::pow(t, inv_c)); }, 1e-12,
      std::span<const double>(&hint, 1));
  if (!r.converged)
    throw NumericError("ggd::laplace_transform: quadrature did not converge");
  return r.value;
}

SeriesResult laplace_series(double s, const GgdParams& p) {
  p.validate();
  if (!(s >= 0.0)) throw std::domain_error("ggd::laplace_series: s must be >= 0");
  SeriesResult out;
  const double bs = p.b * s;
  const bool in_region = p.c > 1.0 || (p.c == 1.0 && bs < 1.0);
  if (!in_region) {
    out.value = laplace_transform(s, p);
    out.notice = "series outside its convergence region; used quadrature";
    return out;
  }
  if (s == 0.0) {
    out.value = 1.0;
    out.used_series = true;
    return out;
  }
  const double lg_a = std::lgamma(p.a);
  const double log_bs = std::log(bs);
  double sum = 0.0;
  double compensation = 0.0;
  double largest = 0.0;
  bool converged = false;
  for (int k = 0; k < 20000; ++k) {
    const double log_mag =
        std::lgamma(p.a + k / p.c) - lg_a + k * log_bs - std::lgamma(k + 1.0);
    const double mag = std::exp(log_mag);
    const double term = (k % 2 == 0) ? mag : -mag;
    largest = std::max(largest, mag);
    // Kahan summation; the series alternates.
    const double y = term - compensation;
    const double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
    if (k > 2 && mag < 1e-18 * std::max(std::abs(sum), 1e-300) && mag < largest) {
      converged = true;
      break;
    }
  }
  const double precision_loss = largest * 1e-16 / std::max(std::abs(sum), 1e-300);
  if (!converged || precision_loss > 1e-10 || !std::isfinite(sum)) {
    out.value = laplace_transform(s, p);
    out.notice = "series lost precision to cancellation; used quadrature";
    return out;
  }
  out.value = sum;
  out.used_series = true;
  return out;
}

std::vector<double> draw(const GgdParams& p, std::size_t n, Rng& rng) {
  p.validate();
  std::vector<double> out(n);
  const double inv_c = 1.0 / p.c;
  for (auto& v : out) v = p.b * std::pow(boost::math::gamma_p_inv(p.a, rng.uniform()), inv_c);
  return out;
}

double log_likelihood(std::span<const double> samples, const GgdParams& p) {
  p.validate();
  const double n = static_cast<double>(samples.size());
  double sum_log = 0.0;
  double sum_pow = 0.0;
  for (double x : samples) {
    const double lx = std::log(std::max(x, 1e-300));
    sum_log += lx;
    sum_pow += std::exp(p.c * (lx - std::log(p.b)));
  }
  return n * (std::log(p.c) - p.a * p.c * std::log(p.b) - std::lgamma(p.a)) +
         (p.a * p.c - 1.0) * sum_log - sum_pow;
}

namespace {

// Quantities of the profile likelihood at a given c.
struct Profile {
  double a = 0.0;
  double b = 0.0;
  double score = 0.0;  // stationarity condition in a
  double loglik = -std::numeric_limits<double>::infinity();
  bool ok = false;
};

class ProfileLikelihood {
 public:
  explicit ProfileLikelihood(std::span<const double> samples) {
    logs_.reserve(samples.size());
    for (double x : samples) logs_.push_back(std::log(std::max(x, 1e-300)));
    n_ = static_cast<double>(logs_.size());
    mean_log_ = std::accumulate(logs_.begin(), logs_.end(), 0.0) / n_;
    max_log_ = *std::max_element(logs_.begin(), logs_.end());
    min_log_ = *std::min_element(logs_.begin(), logs_.end());
  }

  bool degenerate() const { return max_log_ - min_log_ <= 1e-14 * std::max(1.0, std::abs(max_log_)); }

  Profile at(double c) const {
    Profile pr;
    double s = 0.0;  // sum x^c / max^c
    double t = 0.0;  // sum x^c log x / max^c
    for (double lx : logs_) {
      const double w = std::exp(c * (lx - max_log_));
      s += w;
      t += w * lx;
    }
    const double spread = t / s - mean_log_;
    if (!(spread > 0.0)) return pr;
    pr.a = 1.0 / (c * spread);
    const double log_sc = c * max_log_ + std::log(s);
    const double log_b = (log_sc - std::log(n_ * pr.a)) / c;
    pr.b = std::exp(log_b);
    pr.score = c * mean_log_ - log_sc + std::log(n_ * pr.a) -
               boost::math::digamma(pr.a);
    // b^-c * sum x^c = n a at the profile optimum.
    pr.loglik = n_ * (std::log(c) - pr.a * c * log_b - std::lgamma(pr.a)) +
                (pr.a * c - 1.0) * n_ * mean_log_ - n_ * pr.a;
    pr.ok = std::isfinite(pr.score) && std::isfinite(pr.loglik) &&
            std::isfinite(pr.b) && pr.b > 0.0;
    return pr;
  }

 private:
  std::vector<double> logs_;
  double n_ = 0.0;
  double mean_log_ = 0.0;
  double max_log_ = 0.0;
  double min_log_ = 0.0;
};

}  // namespace

FitReport fit_ml(std::span<const double> samples, const FitOptions& opts) {
  if (samples.size() < 50)
    throw NumericError("ggd::fit_ml: need at least 50 samples, got " +
                       std::to_string(samples.size()));
  for (double x : samples) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw NumericError("ggd::fit_ml: samples must be positive and finite");
  }
  const ProfileLikelihood profile(samples);
  if (profile.degenerate())
    throw NumericError("ggd::fit_ml: all samples are identical; no finite MLE");

  const int points = std::max(8, opts.scan_points);
  const double ratio = std::pow(opts.c_max / opts.c_min, 1.0 / (points - 1));
  std::vector<double> grid(points);
  std::vector<Profile> values(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = (i == points - 1) ? opts.c_max : opts.c_min * std::pow(ratio, i);
    values[i] = profile.at(grid[i]);
  }

  FitReport best;
  best.n_samples = samples.size();
  double best_loglik = -std::numeric_limits<double>::infinity();
  double best_c = 0.0;
  Profile best_profile;
  for (int i = 0; i + 1 < points; ++i) {
    const Profile& lo = values[i];
    const Profile& hi = values[i + 1];
    if (!lo.ok || !hi.ok) continue;
    if ((lo.score > 0.0) == (hi.score > 0.0) && lo.score != 0.0) continue;
    double root = grid[i];
    if (lo.score != 0.0) {
      boost::uintmax_t iters = 200;
      auto f = [&](double c) { return profile.at(c).score; };
      const auto bracket = boost::math::tools::toms748_solve(
          f, grid[i], grid[i + 1], lo.score, hi.score,
          boost::math::tools::eps_tolerance<double>(50), iters);
      root = 0.5 * (bracket.first + bracket.second);
    }
    const Profile pr = profile.at(root);
    if (pr.ok && pr.loglik > best_loglik) {
      best_loglik = pr.loglik;
      best_c = root;
      best_profile = pr;
      best.converged = true;
    }
  }
  if (!best.converged) {
    // No stationary point in the bracket: keep the best scanned point.
    for (int i = 0; i < points; ++i) {
      if (values[i].ok && values[i].loglik > best_loglik) {
        best_loglik = values[i].loglik;
        best_c = grid[i];
        best_profile = values[i];
      }
    }
    if (!best_profile.ok) throw NumericError("ggd::fit_ml: profile likelihood undefined");
  }
  best.params = {best_profile.a, best_profile.b, best_c};
  best.log_likelihood = best_profile.loglik;
  best.mse = mse_fit(samples, best.params);
  return best;
}

double mse_fit(std::span<const double> samples, const GgdParams& p) {
  if (samples.size() < 2) throw std::invalid_argument("ggd::mse_fit: need n >= 2");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double empirical = static_cast<double>(k + 1) / n;
    const double d = empirical - cdf(std::max(sorted[k], 0.0), p);
    sum += d * d;
  }
  return sum / n;
}

double correlation_coefficient(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("correlation_coefficient: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("correlation_coefficient: need n >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw NumericError("correlation_coefficient: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace ggd

void write_fit_table(std::ostream& out, const std::vector<FitRow>& rows,
                     const std::string& digest) {
  out << "# oamfso " << OAMFSO_VERSION << "\n"
      << "# digest " << digest << "\n"
      << "m, n, a, b, c, loglik, mse, n_samples\n";
  out.precision(17);
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << row.m << ", " << row.n << ", " << r.params.a << ", " << r.params.b << ", "
        << r.params.c << ", " << r.log_likelihood << ", " << r.mse << ", " << r.n_samples
        << "\n";
  }
}

std::vector<FitRow> read_fit_table(std::istream& in, std::string* digest) {
  std::vector<FitRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (digest && line.rfind("# digest ", 0) == 0) *digest = line.substr(9);
      continue;
    }
    if (!header_seen) {
      if (line.rfind("m, n, a, b, c", 0) != 0)
        throw ConfigError("fit table line " + std::to_string(line_no) +
                          ": expected column header");
      header_seen = true;
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    FitRow row;
    fields >> row.m >> row.n >> row.report.params.a >> row.report.params.b >>
        row.report.params.c >> row.report.log_likelihood >> row.report.mse >>
        row.report.n_samples;
    if (!fields) throw ConfigError("fit table line " + std::to_string(line_no) + ": malformed row");
    row.report.converged = true;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace oamfso
