#pragma once

#include <functional>
#include <span>
#include <vector>

namespace oamfso::numerics {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule mapped to [lo, hi].
QuadratureRule gauss_legendre(int n, double lo, double hi);

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  int intervals = 0;
};

// Globally adaptive 15-point Gauss-Kronrod quadrature on a finite interval.
// The interval is first split at any breakpoints that fall inside it.
IntegrationResult integrate(const std::function<double(double)>& f, double lo,
                            double hi, double rel_tol = 1e-10,
                            double abs_tol = 1e-300,
                            std::span<const double> breakpoints = {},
                            int max_intervals = 4000);

// E[h(T)] for T ~ Gamma(shape, 1), integrated in log t so that the t^(shape-1)
// singularity and far tails are resolved. t_hints mark where h changes
// behaviour (e.g. where an SNR argument crosses 1).
IntegrationResult gamma_expectation(double shape,
                                    const std::function<double(double)>& h,
                                    double rel_tol = 1e-10,
                                    std::span<const double> t_hints = {});

}  // namespace oamfso::numerics
