#pragma once

#include <cmath>

#include "rdlocal/errors.hpp"
#include "rdlocal/types.hpp"

namespace rdlocal {

// Weight of an observation at z for a fit centered on `center` with
// bandwidth h > 0. Triangular: 1 - |z - center|/h inside the window.
// Uniform: 1 inside the window. Zero at and beyond the window edge.
inline double kernel_weight(KernelKind kernel, double z, double center, double h) {
  if (!(h > 0.0)) throw parameter_error("kernel_weight: bandwidth must be positive");
  const double u = std::abs(z - center) / h;
  if (u >= 1.0) return 0.0;
  switch (kernel) {
    case KernelKind::Triangular:
      return 1.0 - u;
    case KernelKind::Uniform:
      return 1.0;
  }
  return 0.0;
}

}  // namespace rdlocal
