#include "oamfso/metrics.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "oamfso/errors.hpp"
#include "oamfso/numerics.hpp"

namespace oamfso {

void SnrModel::validate() const {
  params.validate();
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("SnrModel: mu must be positive and finite");
}

SnrModel SnrModel::from_irradiance(const GgdParams& raw, double mu) {
  raw.validate();
  // E[I] = b Gamma(a + 1/c) / Gamma(a)
  const double scale = std::exp(std::lgamma(raw.a) - std::lgamma(raw.a + 1.0 / raw.c));
  SnrModel m{{raw.a, scale, raw.c}, mu};
  m.validate();
  return m;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }

namespace metrics {

namespace {

constexpr double kCapacityFactor = std::numbers::e / (2.0 * std::numbers::pi);

// gamma = mu b^2 T^(2/c), T ~ Gamma(a, 1)
struct SnrMap {
  double scale;  // mu b^2
  double power;  // 2 / c

  explicit SnrMap(const SnrModel& m)
      : scale(m.mu * m.params.b * m.params.b), power(2.0 / m.params.c) {}
  double operator()(double t) const { return scale * std::pow(t, power); }
  // t at which gamma equals g
  double inverse(double g) const { return std::pow(g / scale, 1.0 / power); }
};

double expect(const SnrModel& m, const std::function<double(double)>& h,
              double rel_tol, double gamma_hint, const char* what) {
  m.validate();
  const SnrMap map(m);
  const double hint = map.inverse(gamma_hint);
  const auto r = numerics::gamma_expectation(
      m.params.a, [&](double t) { return h(map(t)); }, rel_tol,
      std::span<const double>(&hint, 1));
  if (!r.converged) throw NumericError(std::string(what) + ": quadrature did not converge");
  return r.value;
}

}  // namespace

double snr_pdf(double gamma, const SnrModel& m) {
  m.validate();
  if (!(gamma > 0.0)) throw std::domain_error("snr_pdf: gamma must be > 0");
  const double i = std::sqrt(gamma / m.mu);
  return std::exp(ggd::log_pdf(i, m.params) - std::log(2.0 * std::sqrt(gamma * m.mu)));
}

double snr_cdf(double gamma, const SnrModel& m) {
  m.validate();
  if (!(gamma >= 0.0)) throw std::domain_error("snr_cdf: gamma must be >= 0");
  if (gamma == 0.0) return 0.0;
  const auto& p = m.params;
  const double x = std::pow(gamma / (p.b * p.b * m.mu), p.c / 2.0);
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(p.a, x);
}

double ergodic_capacity(const SnrModel& m) {
  return expect(
      m, [](double g) { return std::log1p(kCapacityFactor * g); }, 1e-9,
      1.0 / kCapacityFactor, "ergodic_capacity");
}

double outage_probability(const SnrModel& m, double gamma_th) {
  if (!(gamma_th > 0.0)) throw std::domain_error("outage_probability: gamma_th must be > 0");
  return snr_cdf(gamma_th, m);
}

double average_ber(const SnrModel& m) {
  return expect(
      m, [](double g) { return 0.5 * boost::math::gamma_q(0.5, g / 4.0); }, 1e-11, 4.0,
      "average_ber");
}

double average_ber_q(const SnrModel& m) {
  return expect(
      m, [](double g) { return q_function(std::sqrt(g / 2.0)); }, 1e-11, 4.0,
      "average_ber_q");
}

std::vector<CurvePoint> curves(const GgdParams& raw, std::span<const double> mu_db,
                               std::span<const double> gamma_th_db) {
  std::vector<CurvePoint> out;
  out.reserve(mu_db.size());
  for (double db : mu_db) {
    const SnrModel model = SnrModel::from_irradiance(raw, db_to_linear(db));
    CurvePoint pt;
    pt.mu_db = db;
    pt.capacity_nats = ergodic_capacity(model);
    for (double th : gamma_th_db)
      pt.p_out.push_back(outage_probability(model, db_to_linear(th)));
    pt.ber = average_ber(model);
    out.push_back(std::move(pt));
  }
  return out;
}

void write_curves(std::ostream& out, const std::vector<CurvePoint>& points,
                  std::span<const double> gamma_th_db, const std::string& digest) {
  out << "# oamfso " << OAMFSO_VERSION << "\n# digest " << digest << "\n";
  out << "mu_db, capacity_nats";
  for (double th : gamma_th_db) out << ", p_out(gamma_th=" << th << "dB)";
  out << ", ber\n";
  out.precision(17);
  for (const auto& pt : points) {
    out << pt.mu_db << ", " << pt.capacity_nats;
    for (double p : pt.p_out) out << ", " << p;
    out << ", " << pt.ber << "\n";
  }
}

}  // namespace metrics
}  // namespace oamfso
