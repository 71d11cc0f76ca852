#include "oamfso/turbulence.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "oamfso/fft.hpp"

namespace oamfso {

void TurbulenceSpec::validate() const {
  if (!(cn2 >= 0.0) || !std::isfinite(cn2))
    throw std::invalid_argument("TurbulenceSpec: cn2 must be >= 0");
  if (!(inner_scale > 0.0) || !(outer_scale > inner_scale) ||
      !std::isfinite(outer_scale))
    throw std::invalid_argument("TurbulenceSpec: need 0 < l0 < L0");
  if (!(screen_gain >= 0.0) || !std::isfinite(screen_gain))
    throw std::invalid_argument("TurbulenceSpec: screen_gain must be >= 0");
}

double TurbulenceSpec::kappa0() const { return 2.0 * std::numbers::pi / outer_scale; }

double TurbulenceSpec::kappa_l() const { return 3.3 / inner_scale; }

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Weak:
      return "weak";
    case Regime::ModerateToStrong:
      return "moderate-to-strong";
    case Regime::Saturation:
      return "saturation";
  }
  return "unknown";
}

namespace turbulence {

double spectrum(double kappa, const TurbulenceSpec& spec) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("spectrum: kappa must be >= 0");
  const double kl = spec.kappa_l();
  const double k0 = spec.kappa0();
  const double ratio = kappa / kl;
  const double f = 1.0 + 1.802 * ratio - 0.254 * std::pow(ratio, 7.0 / 6.0);
  return 0.033 * spec.cn2 * std::exp(-ratio * ratio) /
         std::pow(kappa * kappa + k0 * k0, 11.0 / 6.0) * f;
}

double phase_spectrum(double kappa, const TurbulenceSpec& spec, double k,
                      double dz) {
  return 2.0 * std::numbers::pi * k * k * dz * spectrum(kappa, spec);
}

double rytov_variance(double cn2, double lambda, double z) {
  if (!(cn2 > 0.0) || !(lambda > 0.0) || !(z > 0.0))
    throw std::invalid_argument("rytov_variance: arguments must be positive");
  return 1.23 * cn2 * std::pow(2.0 * std::numbers::pi / lambda, 7.0 / 6.0) *
         std::pow(z, 11.0 / 6.0);
}

Regime classify_regime(double sigma_r2) {
  if (!(sigma_r2 >= 0.0))
    throw std::invalid_argument("classify_regime: Rytov variance must be >= 0");
  if (sigma_r2 <= 0.3) return Regime::Weak;
  if (sigma_r2 <= 5.0) return Regime::ModerateToStrong;
  return Regime::Saturation;
}

}  // namespace turbulence

PhaseScreenGenerator::PhaseScreenGenerator(const TurbulenceSpec& spec,
                                           const GridSpec& grid, double k,
                                           double dz)
    : grid_(grid) {
  spec.validate();
  grid.validate();
  if (!(dz > 0.0)) throw std::invalid_argument("phase screen: dz must be > 0");
  const int n = grid.n_points;
  const double dkappa = 2.0 * std::numbers::pi / (n * grid.dx);
  sigma_.assign(grid.cell_count(), 0.0);
  for (int iy = 0; iy < n; ++iy) {
    const double ky = dkappa * (iy < n / 2 ? iy : iy - n);
    for (int ix = 0; ix < n; ++ix) {
      if (ix == 0 && iy == 0) continue;
      const double kx = dkappa * (ix < n / 2 ? ix : ix - n);
      const double kappa = std::hypot(kx, ky);
      const double var =
          spec.screen_gain * dkappa * dkappa * turbulence::phase_spectrum(kappa, spec, k, dz);
      sigma_[static_cast<std::size_t>(iy) * n + ix] = std::sqrt(var);
      if (var > 0.0) zero_ = false;
    }
  }
}

double PhaseScreenGenerator::pixel_variance() const {
  double sum = 0.0;
  for (double s : sigma_) sum += s * s;
  return sum;
}

void PhaseScreenGenerator::generate_into(Rng& rng, std::vector<cdouble>& work,
                                         std::vector<double>& phase) const {
  const std::size_t cells = grid_.cell_count();
  phase.assign(cells, 0.0);
  if (zero_) return;
  work.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    work[i] = cdouble(re * sigma_[i], im * sigma_[i]);
  }
  thread_local std::unique_ptr<Fft2d> fft;
  if (!fft || fft->size() != grid_.n_points) fft = std::make_unique<Fft2d>(grid_.n_points);
  fft->backward(work);
  for (std::size_t i = 0; i < cells; ++i) phase[i] = work[i].real();
}

PhaseScreen PhaseScreenGenerator::generate(Rng& rng) const {
  PhaseScreen screen{grid_, {}};
  std::vector<cdouble> work;
  generate_into(rng, work, screen.phase);
  return screen;
}

PhaseScreen generate_phase_screen(const TurbulenceSpec& spec,
                                  const GridSpec& grid, double k, double dz,
                                  Rng& rng) {
  return PhaseScreenGenerator(spec, grid, k, dz).generate(rng);
}

}  // namespace oamfso
