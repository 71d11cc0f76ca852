#include "oamfso/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <vector>

namespace oamfso {

namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fft2d::Fft2d(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("Fft2d: size must be positive");
  std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n) * n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, flags);
  backward_plan_ = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, flags);
  if (!forward_plan_ || !backward_plan_)
    throw std::runtime_error("Fft2d: FFTW planning failed");
}

Fft2d::~Fft2d() {
  if (!forward_plan_ && !backward_plan_) return;
  std::lock_guard lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (backward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

Fft2d::Fft2d(Fft2d&& other) noexcept
    : n_(other.n_),
      forward_plan_(other.forward_plan_),
      backward_plan_(other.backward_plan_) {
  other.forward_plan_ = nullptr;
  other.backward_plan_ = nullptr;
}

Fft2d& Fft2d::operator=(Fft2d&& other) noexcept {
  if (this != &other) {
    std::swap(n_, other.n_);
    std::swap(forward_plan_, other.forward_plan_);
    std::swap(backward_plan_, other.backward_plan_);
  }
  return *this;
}

void Fft2d::check(std::span<std::complex<double>> data) const {
  if (data.size() != static_cast<std::size_t>(n_) * n_)
    throw std::invalid_argument("Fft2d: array size does not match plan");
}

void Fft2d::forward(std::span<std::complex<double>> data) const {
  check(data);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), p, p);
}

void Fft2d::backward(std::span<std::complex<double>> data) const {
  check(data);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), p, p);
}

}  // namespace oamfso
