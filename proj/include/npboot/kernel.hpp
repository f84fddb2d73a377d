#pragma once

#include <cmath>

namespace npboot {

enum class KernelFamily { epanechnikov, gaussian };

struct KernelSpec {
  KernelFamily family = KernelFamily::epanechnikov;
};

/**
 * Compactly supported parabolic kernel: 0.75 * (1 - u^2) on (-1, 1), zero
 * outside (including at |u| = 1).  Integrates to one.
 */
struct EpanechnikovKernel {
  static double eval(double u) {
    if (std::fabs(u) >= 1.0) return 0.0;
    return 0.75 * (1.0 - u * u);
  }
};

/** Standard normal density. */
struct GaussianKernel {
  static double eval(double u) {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * u * u);
  }
};

/**
 * Evaluate the kernel named by `spec` at u.  The weighted-sum loops in the
 * estimator dispatch on the family once and then call the same static
 * functions, so both entry points agree bit for bit.
 */
inline double kernel_eval(const KernelSpec& spec, double u) {
  switch (spec.family) {
    case KernelFamily::epanechnikov:
      return EpanechnikovKernel::eval(u);
    case KernelFamily::gaussian:
      return GaussianKernel::eval(u);
  }
  return 0.0;
}

}  // namespace npboot
