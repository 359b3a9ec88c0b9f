#pragma once

namespace refract {

// One-parameter Mittag-Leffler function E_beta(z) = sum_n z^n / Gamma(beta n + 1)
// for beta in (0,1) and z <= 0. Power series near the origin; the completely
// monotone spectral representation
//   E_beta(-x) = int_0^infty e^{-x s} K_beta(s) ds,
//   K_beta(s) = (1/pi) sin(beta pi) s^{beta-1} / (s^{2 beta} + 2 s^beta cos(beta pi) + 1)
// for large |z|, where the alternating series cancels catastrophically.
double mittag_leffler(double beta, double z);

// d/dz E_beta(z), same domain and strategy.
double mittag_leffler_deriv(double beta, double z);

}  // namespace refract
