#include "oamfso/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace oamfso::numerics {

namespace {

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment kronrod(const std::function<double(double)>& f, double lo, double hi) {
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(centre);
  double kronrod_sum = fc * kWgk[7];
  double gauss_sum = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(centre - dx);
    const double f2 = f(centre + dx);
    kronrod_sum += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss_sum += kWg[j / 2] * (f1 + f2);
  }
  const double value = kronrod_sum * half;
  const double error = std::abs((kronrod_sum - gauss_sum) * half);
  return {lo, hi, value, error};
}

}  // namespace

QuadratureRule gauss_legendre(int n, double lo, double hi) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo);
  const int roots = (n + 1) / 2;
  for (int i = 0; i < roots; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double derivative = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      derivative = n * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / derivative;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * derivative * derivative);
    rule.nodes[i] = mid - half * z;
    rule.nodes[n - 1 - i] = mid + half * z;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

IntegrationResult integrate(const std::function<double(double)>& f, double lo,
                            double hi, double rel_tol, double abs_tol,
                            std::span<const double> breakpoints,
                            int max_intervals) {
  IntegrationResult result;
  if (!(hi > lo)) {
    result.converged = true;
    return result;
  }
  std::vector<double> cuts{lo};
  for (double b : breakpoints) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<Segment> queue;
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Segment s = kronrod(f, cuts[i], cuts[i + 1]);
    total += s.value;
    total_error += s.error;
    queue.push(s);
  }
  int count = static_cast<int>(queue.size());
  while (total_error > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (count >= max_intervals) break;
    const Segment worst = queue.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;  // interval exhausted
    queue.pop();
    const Segment left = kronrod(f, worst.lo, mid);
    const Segment right = kronrod(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++count;
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  total = 0.0;
  total_error = 0.0;
  while (!queue.empty()) {
    total += queue.top().value;
    total_error += queue.top().error;
    queue.pop();
  }
  result.value = total;
  result.error = total_error;
  result.intervals = count;
  result.converged = std::isfinite(total) &&
                     total_error <= std::max(abs_tol, rel_tol * std::abs(total));
  return result;
}

IntegrationResult gamma_expectation(double shape,
                                    const std::function<double(double)>& h,
                                    double rel_tol,
                                    std::span<const double> t_hints) {
  if (!(shape > 0.0) || !std::isfinite(shape))
    throw std::invalid_argument("gamma_expectation: shape must be positive");
  const double log_norm = std::lgamma(shape);
  // Below x_lo the weight exp(shape x) is under 1e-300 (or x is at the limit
  // of representable t); above x_hi the Gamma tail is negligible.
  const double x_lo = std::max(-700.0, -690.0 / shape);
  const double t_hi = shape + 60.0 + 15.0 * std::sqrt(shape);
  const double x_hi = std::log(t_hi);
  auto integrand = [&](double x) {
    const double t = std::exp(x);
    const double w = std::exp(shape * x - t - log_norm);
    if (w == 0.0) return 0.0;
    return w * h(t);
  };
  std::vector<double> cuts;
  const int pieces = 24;
  for (int i = 1; i < pieces; ++i) cuts.push_back(x_lo + (x_hi - x_lo) * i / pieces);
  cuts.push_back(std::log(shape));
  for (double t : t_hints) {
    if (t > 0.0 && std::isfinite(t)) {
      const double x = std::log(t);
      cuts.push_back(x);
      cuts.push_back(x - 2.0);
      cuts.push_back(x + 2.0);
    }
  }
  return integrate(integrand, x_lo, x_hi, rel_tol, 1e-300, cuts, 20000);
}

}  // namespace oamfso::numerics
