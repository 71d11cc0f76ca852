#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oamfso/ggd.hpp"
#include "oamfso/metrics.hpp"
#include "oamfso/propagation.hpp"

namespace oamfso {

// Square MRC system: the same modes are transmitted and analyzed.
struct DiversityConfig {
  ModeSet modes;
  void validate() const;
};

namespace mimo {

// I_M = (1/M) sqrt(sum_n (sum_m I_mn)^2) for an M x M row-major matrix
// (rows transmit, columns receive).
double mrc_combined_envelope(std::span<const double> i_matrix, std::size_t m);
double mrc_combined_envelope(const ChannelRealization& r);

// eta^2 / (M^2 N0) * sum_n (sum_m I_mn)^2
double mrc_snr(std::span<const double> i_matrix, std::size_t m, double eta,
               double n0);

// I_M for every realization of the sample set.
std::vector<double> combined_envelopes(const IrradianceSampleSet& samples,
                                       const ModeSet& modes);

FitReport fit_combined(const IrradianceSampleSet& samples,
                       const DiversityConfig& cfg);

// OOK with a mid-level threshold over the given channel envelopes: each
// envelope is normalized by the sample mean, gamma = mu * Ihat^2, and
// bits_per_sample bits are sent through y = x sqrt(gamma) + v with v of
// variance 1/2, so the conditional error rate is Q(sqrt(gamma / 2)).
double empirical_ook_ber(std::span<const double> envelopes, double mu,
                         std::size_t bits_per_sample, Rng& rng);

struct SetCurve {
  ModeSet modes;
  std::string set_id;
  FitReport fit;
  std::vector<double> mu_db;
  std::vector<double> p_out;  // at gamma_th
  std::vector<double> ber;
};

struct CorrelationEntry {
  int m = 0;
  int n = 0;
  double rho = 0.0;  // corr(I_mm, I_mn)
};

struct DiversityReport {
  double gamma_th_db = 0.0;
  std::vector<SetCurve> sets;
  std::vector<CorrelationEntry> correlation;
};

std::string set_id(const ModeSet& modes);

DiversityReport diversity_report(const std::vector<ModeSet>& sets,
                                 const IrradianceSampleSet& samples,
                                 std::span<const double> mu_db,
                                 double gamma_th_db);

// "set_id, mu_db, p_out, ber, a, b, c"
void write_report(std::ostream& out, const DiversityReport& report,
                  const std::string& digest);
// "m, n, rho"
void write_correlation(std::ostream& out, const DiversityReport& report,
                       const std::string& digest);

}  // namespace mimo
}  // namespace oamfso
