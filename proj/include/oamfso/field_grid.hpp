#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace oamfso {

using cdouble = std::complex<double>;

// Square sampling grid. Sample centres sit at (i - (n-1)/2) * dx, so for even
// n the optical axis falls between the four central samples.
struct GridSpec {
  int n_points = 0;
  double dx = 0.0;  // [m]

  void validate() const;
  double side_length() const { return n_points * dx; }
  double coordinate(int i) const { return (i - 0.5 * (n_points - 1)) * dx; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(n_points) * n_points;
  }
  bool operator==(const GridSpec&) const = default;
};

// Sampled complex amplitude [sqrt(W)/m], row-major (y outer, x inner).
class ComplexField {
 public:
  ComplexField(GridSpec grid, std::vector<cdouble> values);
  static ComplexField zeros(GridSpec grid);

  const GridSpec& grid() const { return grid_; }
  std::span<const cdouble> values() const { return values_; }
  cdouble at(int ix, int iy) const {
    return values_[static_cast<std::size_t>(iy) * grid_.n_points + ix];
  }
  ComplexField scaled(cdouble factor) const;
  std::vector<cdouble> release() && { return std::move(values_); }

 private:
  GridSpec grid_;
  std::vector<cdouble> values_;
};

// Laguerre-Gauss beam. m is the topological charge, p the radial index.
struct LGModeSpec {
  int m = 0;
  int p = 0;
  double w0 = 0.0;      // beam waist [m]
  double lambda = 0.0;  // wavelength [m]

  void validate() const;
  bool is_oam() const { return p == 0 && m != 0; }
  double wavenumber() const;
  double rayleigh_range() const;
  double beam_radius(double z) const;
};

// Ordered set of topological charges (transmit or receive side).
class ModeSet {
 public:
  ModeSet() = default;
  ModeSet(std::vector<int> modes);  // NOLINT: implicit from a list is intended
  ModeSet(std::initializer_list<int> modes);

  std::span<const int> modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }
  int operator[](std::size_t i) const { return modes_[i]; }
  bool contains(int m) const;
  int max_abs() const;
  auto begin() const { return modes_.begin(); }
  auto end() const { return modes_.end(); }
  bool operator==(const ModeSet&) const = default;

 private:
  std::vector<int> modes_;
};

// Samples the LG field at propagation distance z and renormalizes it to unit
// discrete power. Throws std::invalid_argument for bad beam parameters and
// std::domain_error when the beam does not fit on the grid.
ComplexField lg_field(const LGModeSpec& spec, const GridSpec& grid, double z);

// sum u * conj(v) * dx^2
cdouble overlap(const ComplexField& u, const ComplexField& v);

// |<received, analyzer>|^2, the fraction of power found on the analyzer mode.
double crosstalk_irradiance(const ComplexField& received,
                            const ComplexField& analyzer);

double total_power(const ComplexField& u);

}  // namespace oamfso
