#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "oamfso/field_grid.hpp"
#include "oamfso/rng.hpp"

namespace oamfso {

// Screen gain that brings 20 screens over 1 km at the regime Cn2 values to
// the self-channel shapes of the reference histograms (weak: left-skewed,
// mode near 0.95). Set 1 for the unscaled Kolmogorov strength.
inline constexpr double kCalibratedScreenGain = 0.15;

struct TurbulenceSpec {
  double cn2 = 0.0;          // [m^(-2/3)]
  double inner_scale = 0.0;  // l0 [m]
  double outer_scale = 0.0;  // L0 [m]
  // Multiplier on the phase spectrum of generated screens; 1 is the
  // Kolmogorov strength implied by cn2.
  double screen_gain = 1.0;

  void validate() const;
  double kappa0() const;  // 2 pi / L0
  double kappa_l() const; // 3.3 / l0
};

enum class Regime { Weak, ModerateToStrong, Saturation };

std::string_view to_string(Regime regime);

namespace turbulence {

// Modified Kolmogorov refractive-index spectrum Phi_n(kappa).
double spectrum(double kappa, const TurbulenceSpec& spec);

// Phase spectrum of a slab of thickness dz: 2 pi k^2 dz Phi_n(kappa).
double phase_spectrum(double kappa, const TurbulenceSpec& spec, double k,
                      double dz);

double rytov_variance(double cn2, double lambda, double z);

// Weak for <= 0.3, moderate-to-strong up to and including 5, saturation above.
Regime classify_regime(double sigma_r2);

}  // namespace turbulence

struct PhaseScreen {
  GridSpec grid;
  std::vector<double> phase;  // [rad], row-major
};

// FFT phase-screen generator for a fixed grid and slab. Every spectral bin gets
// a complex Gaussian coefficient whose real and imaginary parts each have
// variance (2 pi / (N dx))^2 * Phi_phi(kappa); the screen is the real part of
// the unnormalized inverse DFT. The zero-frequency (piston) bin is left empty.
class PhaseScreenGenerator {
 public:
  PhaseScreenGenerator(const TurbulenceSpec& spec, const GridSpec& grid,
                       double k, double dz);

  PhaseScreen generate(Rng& rng) const;
  // Fills an existing buffer; used by the propagation kernels.
  void generate_into(Rng& rng, std::vector<cdouble>& work,
                     std::vector<double>& phase) const;

  // Ensemble variance of every pixel: sum over bins of the per-component
  // coefficient variance.
  double pixel_variance() const;
  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  std::vector<double> sigma_;  // per-bin standard deviation
  bool zero_ = true;
};

PhaseScreen generate_phase_screen(const TurbulenceSpec& spec,
                                  const GridSpec& grid, double k, double dz,
                                  Rng& rng);

}  // namespace oamfso
