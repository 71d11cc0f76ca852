#pragma once

#include <Eigen/Dense>
#include <array>
#include <string_view>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oamfso/ggd.hpp"
#include "oamfso/propagation.hpp"

namespace oamfso {

// Transmit matrix, rows are time slots and columns are OAM modes. The
// received block is Y = eta X I + N with I the (tx x rx) irradiance matrix.
struct Codeword {
  Eigen::MatrixXd x;
  int label = 0;
};

enum class CodeKind { Alamouti, GoldenLight, SpatialRepetition, Uncoded };

std::string_view to_string(CodeKind kind);

struct CodeSpec {
  CodeKind kind = CodeKind::Alamouti;
  int pam_order = 2;

  int modes() const;       // transmit modes M
  int time_slots() const;
  int symbols() const;     // PAM symbols per codeword
  int bits_per_codeword() const;
  double bits_per_channel_use() const;
};

struct Codebook {
  CodeSpec spec;
  std::vector<Codeword> words;  // label k carries the natural-binary bits of k
  double power_scale = 1.0;     // alpha applied to the raw PAM levels
};

// Model for the PEP of orthogonal codes: gamma_perp = scale * sum I_mn^2 with
// sum I_mn^2 approximated by a GGD.
struct PepModel {
  GgdParams gamma_perp;

  static PepModel from_fit(const GgdParams& sum_sq, double eta, double n0,
                           int modes);
};

namespace stc {

// [[s1, s2], [L-1-s2, s1]]; for L = 2 the reflection is the bit-wise not.
Eigen::MatrixXd alamouti_encode(int s1, int s2, int pam_order = 2);

// Golden-Light codeword with z1 = (1+sqrt5)/2, z2 = 2+sqrt5 and conjugates
// taken as (sqrt5-1)/2 and sqrt5-2.
Eigen::MatrixXd gl_encode(const std::array<int, 4>& s, int pam_order = 2);

// Every codeword of the code, scaled so that the average optical power summed
// over modes is one per time slot.
Codebook make_codebook(const CodeSpec& spec);

// argmin_k ||y - eta X_k I||_F, ties to the lowest label.
int ml_decode(const Eigen::MatrixXd& y, const Eigen::MatrixXd& channel,
              const Codebook& codebook, double eta);

// Eigenvalues (ascending) of D^T D with D = x_i - x_j, the mode-space Gram of
// the codeword difference.
std::vector<double> codeword_eigenvalues(const Eigen::MatrixXd& x_i,
                                         const Eigen::MatrixXd& x_j);

// If D^T D = z I within tol, returns z.
std::optional<double> orthogonal_distance(const Eigen::MatrixXd& x_i,
                                          const Eigen::MatrixXd& x_j,
                                          double tol = 1e-10);

// (1/pi) int_0^{pi/2} E[exp(-z gamma_perp / (2 sin^2 theta))] dtheta with a
// 96-node Gauss-Legendre rule.
double pep_orthogonal(double z_delta, const PepModel& model);

// Union bound on the bit error rate; throws UnsupportedOperation for codes
// whose difference Grams are not scaled identities.
double union_bound_ber(const Codebook& codebook, const PepModel& model);

// sum_{m,n} I_mn^2 per realization over the given modes.
std::vector<double> sum_squared_gains(const IrradianceSampleSet& samples,
                                      const ModeSet& modes);

struct SimulationOptions {
  std::uint64_t min_bit_errors = 100;
  std::uint64_t max_codewords = 1'000'000;
};

struct BerPoint {
  double mu_db = 0.0;
  double ber = 0.0;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;
  bool insufficient = false;  // draw cap hit before min_bit_errors
};

// Monte Carlo BER with eta = sqrt(mu), unit noise variance per real entry and
// channel matrices resampled from the sample set over the first
// spec.modes() entries of modes. Deterministic given master_seed.
std::vector<BerPoint> simulate_ber(const Codebook& codebook,
                                   const IrradianceSampleSet& samples,
                                   const ModeSet& modes,
                                   std::span<const double> mu_db,
                                   std::uint64_t master_seed,
                                   const SimulationOptions& opts = {},
                                   unsigned jobs = 1);

void write_codebook(std::ostream& out, const Codebook& codebook);

}  // namespace stc
}  // namespace oamfso
