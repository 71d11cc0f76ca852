#include "oamfso/field_grid.hpp"

#include <algorithm>
#include <boost/math/special_functions/laguerre.hpp>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace oamfso {

void GridSpec::validate() const {
  if (n_points < 16 || n_points % 2 != 0)
    throw std::invalid_argument("GridSpec: n_points must be even and >= 16");
  if (!(dx > 0.0) || !std::isfinite(dx))
    throw std::invalid_argument("GridSpec: dx must be positive");
}

ComplexField::ComplexField(GridSpec grid, std::vector<cdouble> values)
    : grid_(grid), values_(std::move(values)) {
  grid_.validate();
  if (values_.size() != grid_.cell_count())
    throw std::invalid_argument("ComplexField: value count does not match grid");
}

ComplexField ComplexField::zeros(GridSpec grid) {
  return ComplexField(grid, std::vector<cdouble>(grid.cell_count()));
}

ComplexField ComplexField::scaled(cdouble factor) const {
  std::vector<cdouble> out(values_);
  for (auto& v : out) v *= factor;
  return ComplexField(grid_, std::move(out));
}

void LGModeSpec::validate() const {
  if (!(w0 > 0.0) || !std::isfinite(w0))
    throw std::invalid_argument("LGModeSpec: w0 must be positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("LGModeSpec: lambda must be positive");
  if (p < 0) throw std::invalid_argument("LGModeSpec: p must be >= 0");
}

double LGModeSpec::wavenumber() const { return 2.0 * std::numbers::pi / lambda; }

double LGModeSpec::rayleigh_range() const {
  return std::numbers::pi * w0 * w0 / lambda;
}

double LGModeSpec::beam_radius(double z) const {
  const double ratio = z / rayleigh_range();
  return w0 * std::sqrt(1.0 + ratio * ratio);
}

ModeSet::ModeSet(std::vector<int> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) throw std::invalid_argument("ModeSet: empty");
  std::set<int> seen(modes_.begin(), modes_.end());
  if (seen.size() != modes_.size())
    throw std::invalid_argument("ModeSet: duplicate topological charge");
}

ModeSet::ModeSet(std::initializer_list<int> modes)
    : ModeSet(std::vector<int>(modes)) {}

bool ModeSet::contains(int m) const {
  return std::find(modes_.begin(), modes_.end(), m) != modes_.end();
}

int ModeSet::max_abs() const {
  int best = 0;
  for (int m : modes_) best = std::max(best, std::abs(m));
  return best;
}

ComplexField lg_field(const LGModeSpec& spec, const GridSpec& grid, double z) {
  spec.validate();
  grid.validate();
  if (!(z >= 0.0)) throw std::invalid_argument("lg_field: z must be >= 0");

  const int abs_m = std::abs(spec.m);
  const double w = spec.beam_radius(z);
  if (w * std::sqrt(abs_m + 1.0) > 0.25 * grid.side_length()) {
    std::ostringstream msg;
    msg << "lg_field: beam radius " << w * std::sqrt(abs_m + 1.0)
        << " m exceeds a quarter of the grid side " << grid.side_length() << " m";
    throw std::domain_error(msg.str());
  }

  const double k = spec.wavenumber();
  const double zr = spec.rayleigh_range();
  const double curvature = k * z / (2.0 * (z * z + zr * zr));
  const double gouy = (2.0 * spec.p + abs_m + 1.0) * std::atan(z / zr);
  const double log_norm = 0.5 * (std::log(2.0) + std::lgamma(spec.p + 1.0) -
                                 std::log(std::numbers::pi) -
                                 std::lgamma(spec.p + abs_m + 1.0));
  const double amplitude = std::exp(log_norm) / w;

  const int n = grid.n_points;
  std::vector<cdouble> values(grid.cell_count());
  double power = 0.0;
  for (int iy = 0; iy < n; ++iy) {
    const double y = grid.coordinate(iy);
    for (int ix = 0; ix < n; ++ix) {
      const double x = grid.coordinate(ix);
      const double r2 = x * x + y * y;
      const double rho = std::sqrt(2.0 * r2) / w;
      const double radial =
          amplitude * std::pow(rho, abs_m) *
          boost::math::laguerre(static_cast<unsigned>(spec.p),
                                static_cast<unsigned>(abs_m), 2.0 * r2 / (w * w)) *
          std::exp(-r2 / (w * w));
      const double phi = std::atan2(y, x);
      const double phase = -curvature * r2 + gouy - spec.m * phi;
      const cdouble v = std::polar(radial, phase);
      values[static_cast<std::size_t>(iy) * n + ix] = v;
      power += std::norm(v);
    }
  }
  power *= grid.dx * grid.dx;
  if (!(power > 0.0)) throw std::domain_error("lg_field: field has no power on grid");
  const double scale = 1.0 / std::sqrt(power);
  for (auto& v : values) v *= scale;
  return ComplexField(grid, std::move(values));
}

cdouble overlap(const ComplexField& u, const ComplexField& v) {
  if (!(u.grid() == v.grid()))
    throw std::invalid_argument("overlap: fields live on different grids");
  const auto a = u.values();
  const auto b = v.values();
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    // a * conj(b)
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].imag() * b[i].real() - a[i].real() * b[i].imag();
  }
  const double cell = u.grid().dx * u.grid().dx;
  return {re * cell, im * cell};
}

double crosstalk_irradiance(const ComplexField& received,
                            const ComplexField& analyzer) {
  return std::norm(overlap(received, analyzer));
}

double total_power(const ComplexField& u) {
  double sum = 0.0;
  for (const auto& v : u.values()) sum += std::norm(v);
  return sum * u.grid().dx * u.grid().dx;
}

}  // namespace oamfso
