#pragma once

#include <cstddef>
#include <cstdint>

#include "pcl/training.hpp"

namespace pcl {

/// Largest relative discrepancies |g - fd| / max(|g|, |fd|) between an
/// analytic gradient and a fourth-order central difference
///   (f(-2h) - 8 f(-h) + 8 f(h) - f(2h)) / (12 h).
/// The second-order quotient at h = 1e-6 is round-off bound near 1e-6 on
/// these objectives; the wider stencil is accurate to ~1e-8.
struct GradientCheckReport {
  double max_directional = 0.0;
  double max_component = 0.0;
  std::size_t checks = 0;
};

/// Discrete-adjoint gradient of the default problem on an (n_space, n_time)
/// grid (one RK4 step per slab) at a random control in [-1, 1]: one random
/// direction and `components` random entries. The differences are taken of
/// the objective recomputed in long double, so entries many orders below J
/// are still resolved.
GradientCheckReport check_adjoint_gradient(std::size_t n_space, std::size_t n_time,
                                           std::uint64_t seed, std::size_t components = 20,
                                           double h = 3e-4);

/// Parameter gradient of a PINN loss with default-architecture networks on a
/// random collocation set of `n_points` interior points, boundary times and
/// initial/terminal grid nodes, on every parameter when `components` is 0.
GradientCheckReport check_pinn_gradient(Formulation formulation, std::size_t n_points,
                                        std::uint64_t seed, std::size_t components = 0,
                                        double h = 1e-3);

}  // namespace pcl
