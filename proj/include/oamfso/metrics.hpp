#pragma once

#include <cmath>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oamfso/ggd.hpp"

namespace oamfso {

// SNR statistics of an IM/DD link: gamma = mu * Ihat^2 where Ihat = I / E[I]
// follows a GGD and mu = (eta E[I])^2 / N0 is the average electrical SNR.
struct SnrModel {
  GgdParams params;  // of the mean-normalized irradiance
  double mu = 1.0;

  void validate() const;
  // Rescales a fit of the raw irradiance to unit mean.
  static SnrModel from_irradiance(const GgdParams& raw, double mu);
};

double db_to_linear(double db);
double linear_to_db(double x);

namespace metrics {

double snr_pdf(double gamma, const SnrModel& m);
double snr_cdf(double gamma, const SnrModel& m);

// Integral of ln(1 + e/(2 pi) gamma) f(gamma), in nats.
double ergodic_capacity(const SnrModel& m);
inline double nats_to_bits(double nats) { return nats * 1.4426950408889634; }

double outage_probability(const SnrModel& m, double gamma_th);

// Gamma(1/2, gamma/4) / (2 Gamma(1/2)) averaged over the SNR law.
double average_ber(const SnrModel& m);
// Same quantity through E[Q(sqrt(gamma/2))].
double average_ber_q(const SnrModel& m);

inline double q_function(double x) { return 0.5 * std::erfc(x / 1.4142135623730951); }

struct CurvePoint {
  double mu_db = 0.0;
  double capacity_nats = 0.0;
  std::vector<double> p_out;  // one per threshold
  double ber = 0.0;
};

// Sweeps mu over mu_db for a fit of the raw irradiance. Thresholds are given
// in dB.
std::vector<CurvePoint> curves(const GgdParams& raw,
                               std::span<const double> mu_db,
                               std::span<const double> gamma_th_db);

void write_curves(std::ostream& out, const std::vector<CurvePoint>& points,
                  std::span<const double> gamma_th_db,
                  const std::string& digest);

}  // namespace metrics
}  // namespace oamfso
