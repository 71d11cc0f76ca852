#pragma once

#include <complex>
#include <span>

namespace oamfso {

// In-place unnormalized 2-D DFT on an n x n row-major array. Plans are made
// with FFTW_ESTIMATE | FFTW_UNALIGNED so that any array can be transformed and
// results do not depend on timing measurements.
class Fft2d {
 public:
  explicit Fft2d(int n);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;
  Fft2d(Fft2d&& other) noexcept;
  Fft2d& operator=(Fft2d&& other) noexcept;

  int size() const { return n_; }
  // sum_x u(x) exp(-i k.x)
  void forward(std::span<std::complex<double>> data) const;
  // sum_k U(k) exp(+i k.x), no 1/n^2 factor
  void backward(std::span<std::complex<double>> data) const;

 private:
  void check(std::span<std::complex<double>> data) const;
  int n_ = 0;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

}  // namespace oamfso
