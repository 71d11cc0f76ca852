#include "oamfso/mimo.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "oamfso/errors.hpp"

namespace oamfso {

void DiversityConfig::validate() const {
  if (modes.size() == 0) throw std::invalid_argument("DiversityConfig: empty mode set");
}

namespace mimo {

double mrc_combined_envelope(std::span<const double> i_matrix, std::size_t m) {
  if (m == 0 || i_matrix.size() != m * m)
    throw std::invalid_argument("mrc_combined_envelope: expected an M x M matrix");
  double sum_sq = 0.0;
  for (std::size_t n = 0; n < m; ++n) {
    double column = 0.0;
    for (std::size_t row = 0; row < m; ++row) column += i_matrix[row * m + n];
    sum_sq += column * column;
  }
  return std::sqrt(sum_sq) / static_cast<double>(m);
}

double mrc_combined_envelope(const ChannelRealization& r) {
  if (r.tx != r.rx)
    throw std::invalid_argument("mrc_combined_envelope: tx and rx modes differ");
  return mrc_combined_envelope(r.i_matrix, r.tx.size());
}

double mrc_snr(std::span<const double> i_matrix, std::size_t m, double eta, double n0) {
  if (!(n0 > 0.0)) throw std::invalid_argument("mrc_snr: n0 must be positive");
  const double env = mrc_combined_envelope(i_matrix, m);
  return eta * eta * env * env / n0;
}

std::vector<double> combined_envelopes(const IrradianceSampleSet& samples,
                                       const ModeSet& modes) {
  DiversityConfig{modes}.validate();
  const std::size_t m = modes.size();
  std::vector<const std::vector<double>*> columns;
  for (int tx : modes)
    for (int rx : modes) columns.push_back(&samples.channel(tx, rx));
  std::vector<double> out(samples.size());
  std::vector<double> matrix(m * m);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    for (std::size_t j = 0; j < m * m; ++j) matrix[j] = (*columns[j])[k];
    out[k] = mrc_combined_envelope(matrix, m);
  }
  return out;
}

FitReport fit_combined(const IrradianceSampleSet& samples, const DiversityConfig& cfg) {
  cfg.validate();
  return ggd::fit_ml(combined_envelopes(samples, cfg.modes));
}

double empirical_ook_ber(std::span<const double> envelopes, double mu,
                         std::size_t bits_per_sample, Rng& rng) {
  if (envelopes.empty() || bits_per_sample == 0)
    throw std::invalid_argument("empirical_ook_ber: nothing to simulate");
  if (!(mu > 0.0)) throw std::invalid_argument("empirical_ook_ber: mu must be positive");
  const double mean =
      std::accumulate(envelopes.begin(), envelopes.end(), 0.0) / envelopes.size();
  if (!(mean > 0.0)) throw NumericError("empirical_ook_ber: envelope mean is not positive");
  const double noise_sd = std::sqrt(0.5);
  std::uint64_t errors = 0;
  for (double env : envelopes) {
    const double amp = std::sqrt(mu) * env / mean;
    const double threshold = 0.5 * amp;
    for (std::size_t b = 0; b < bits_per_sample; ++b) {
      const bool bit = (rng.next() >> 63) != 0;
      const double y = (bit ? amp : 0.0) + noise_sd * rng.normal();
      if ((y > threshold) != bit) ++errors;
    }
  }
  return static_cast<double>(errors) /
         (static_cast<double>(envelopes.size()) * static_cast<double>(bits_per_sample));
}

std::string set_id(const ModeSet& modes) {
  std::string id;
  for (int m : modes) {
    if (!id.empty()) id += ':';
    id += (m >= 0 ? "+" : "") + std::to_string(m);
  }
  return id;
}

DiversityReport diversity_report(const std::vector<ModeSet>& sets,
                                 const IrradianceSampleSet& samples,
                                 std::span<const double> mu_db, double gamma_th_db) {
  DiversityReport report;
  report.gamma_th_db = gamma_th_db;
  const double gamma_th = db_to_linear(gamma_th_db);
  std::set<int> involved;
  for (const auto& modes : sets) {
    SetCurve curve;
    curve.modes = modes;
    curve.set_id = set_id(modes);
    curve.fit = fit_combined(samples, DiversityConfig{modes});
    for (double db : mu_db) {
      const SnrModel model = SnrModel::from_irradiance(curve.fit.params, db_to_linear(db));
      curve.mu_db.push_back(db);
      curve.p_out.push_back(metrics::outage_probability(model, gamma_th));
      curve.ber.push_back(metrics::average_ber(model));
    }
    report.sets.push_back(std::move(curve));
    involved.insert(modes.begin(), modes.end());
  }
  for (int m : involved) {
    if (!samples.has_channel(m, m)) continue;
    for (int n : samples.rx()) {
      if (n == m || !samples.has_channel(m, n)) continue;
      report.correlation.push_back(
          {m, n, ggd::correlation_coefficient(samples.channel(m, m), samples.channel(m, n))});
    }
  }
  return report;
}

void write_report(std::ostream& out, const DiversityReport& report,
                  const std::string& digest) {
  out << "# oamfso " << OAMFSO_VERSION << "\n# digest " << digest << "\n"
      << "# gamma_th_db " << report.gamma_th_db << "\n"
      << "set_id, mu_db, p_out, ber, a, b, c\n";
  out.precision(17);
  for (const auto& s : report.sets) {
    const auto& p = s.fit.params;
    for (std::size_t i = 0; i < s.mu_db.size(); ++i) {
      out << s.set_id << ", " << s.mu_db[i] << ", " << s.p_out[i] << ", " << s.ber[i]
          << ", " << p.a << ", " << p.b << ", " << p.c << "\n";
    }
  }
}

void write_correlation(std::ostream& out, const DiversityReport& report,
                       const std::string& digest) {
  out << "# oamfso " << OAMFSO_VERSION << "\n# digest " << digest << "\nm, n, rho\n";
  out.precision(17);
  for (const auto& e : report.correlation) out << e.m << ", " << e.n << ", " << e.rho << "\n";
}

}  // namespace mimo
}  // namespace oamfso
