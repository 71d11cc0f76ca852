#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "oamfso/field_grid.hpp"
#include "oamfso/turbulence.hpp"

namespace oamfso {

struct ChannelConfig {
  double lambda = 850e-9;
  double w0 = 0.016;
  double z_total = 1000.0;
  int n_screens = 20;
  GridSpec grid{256, 2.72e-3};
  TurbulenceSpec turbulence{0.0, 5e-3, 20.0, kCalibratedScreenGain};
  ModeSet tx_modes{1};
  ModeSet rx_modes{1};
  // Super-Gaussian edge absorber applied after every free-space step.
  bool absorber = false;

  // Throws ConfigError on any violated invariant, including the receiver
  // aperture rule d_Rx = 2 w(z) sqrt(m_max) <= grid side length.
  void validate() const;
  double wavenumber() const;
  double slab_length() const { return z_total / n_screens; }
  double receiver_diameter() const;
  // Canonical text of every field that influences a realization.
  std::string canonical_text() const;
};

// Hex SHA-256 over the canonical configuration text and the master seed.
std::string channel_digest(const ChannelConfig& cfg, std::uint64_t master_seed);

struct ChannelRealization {
  std::uint64_t index = 0;
  std::vector<int> tx;
  std::vector<int> rx;
  std::vector<double> i_matrix;  // tx.size() x rx.size(), row-major
  bool valid = true;

  double at(std::size_t row, std::size_t col) const {
    return i_matrix[row * rx.size() + col];
  }
};

// Per-(m, n) irradiance samples, aligned by realization.
class IrradianceSampleSet {
 public:
  IrradianceSampleSet() = default;
  IrradianceSampleSet(std::string digest, std::vector<int> tx,
                      std::vector<int> rx);

  const std::string& digest() const { return digest_; }
  const std::vector<int>& tx() const { return tx_; }
  const std::vector<int>& rx() const { return rx_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<std::uint64_t>& realization_indices() const {
    return indices_;
  }
  std::size_t excluded() const { return excluded_; }
  void set_excluded(std::size_t n) { excluded_ = n; }

  bool has_channel(int m, int n) const;
  // Throws MissingInputError when (m, n) was not simulated.
  const std::vector<double>& channel(int m, int n) const;
  // Channel matrix of realization k restricted to the given modes.
  std::vector<double> matrix(std::size_t k, const ModeSet& tx,
                             const ModeSet& rx) const;

  void add(const ChannelRealization& r);
  // Appends one row read from a store; rows of a realization must be
  // contiguous.
  void add_value(std::uint64_t index, int m, int n, double value);
  // Throws MissingInputError when some realization lacks a (m, n) pair.
  void check_aligned() const;

 private:
  std::string digest_;
  std::vector<int> tx_;
  std::vector<int> rx_;
  std::vector<std::uint64_t> indices_;
  std::map<std::pair<int, int>, std::vector<double>> values_;
  std::size_t excluded_ = 0;
};

// Paraxial free-space step: FFT, multiply by exp(+i kappa^2 dz / (2k)),
// inverse FFT. The sign matches the exp(-ikz) convention of lg_field, so
// propagated fields keep the analyzers' curvature and Gouy phases.
ComplexField angular_spectrum_step(const ComplexField& u, double dz, double k);

// Precomputes launch fields, analyzers, screen statistics and the transfer
// function of one configuration. realize() is const and reentrant given a
// per-thread Workspace.
class ChannelSimulator {
 public:
  struct Workspace;

  explicit ChannelSimulator(ChannelConfig cfg);
  ~ChannelSimulator();

  const ChannelConfig& config() const { return cfg_; }
  std::unique_ptr<Workspace> make_workspace() const;

  // One atmosphere (n_screens screens drawn from substreams of
  // (master_seed, index)) shared by every transmitted mode.
  ChannelRealization realize(std::uint64_t master_seed, std::uint64_t index,
                             Workspace& ws) const;
  ChannelRealization realize(std::uint64_t master_seed,
                             std::uint64_t index) const;

 private:
  ChannelConfig cfg_;
  std::vector<ComplexField> launch_;
  std::vector<ComplexField> analyzers_;
  std::vector<cdouble> transfer_;
  std::vector<double> absorber_;
  PhaseScreenGenerator screens_;
};

ChannelRealization propagate_realization(const ChannelConfig& cfg,
                                         std::uint64_t master_seed,
                                         std::uint64_t index = 0);

// Realizations first_index .. first_index + n - 1. Output does not depend on
// the number of worker threads. Invalid realizations are dropped and counted.
IrradianceSampleSet run_monte_carlo(const ChannelConfig& cfg,
                                    std::size_t n_realizations,
                                    std::uint64_t master_seed,
                                    unsigned jobs = 1,
                                    std::uint64_t first_index = 0);

}  // namespace oamfso
