#pragma once

#include "gdnm/env.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace gdnm {

/// Exact joint law of the first displacements (a, b) of two walkers started
/// on the same row at 0 and at `separation`, sharing the row above.
/// Displacements are stored on [-radius, radius]^2.
struct JointStepLaw {
    std::int64_t separation = 0;
    std::int64_t radius = 0;
    std::vector<double> mass; ///< mass[(a + radius) * (2 radius + 1) + (b + radius)]
    /// Upper bound on the mass outside the stored square.
    double truncation_bound = 0.0;

    double at(std::int64_t a, std::int64_t b) const noexcept;

    /// P(Z^m_1 - Z^0_1 = separation + shift) over the stored square.
    double separation_change(std::int64_t shift) const noexcept;
    /// P(Z^m_1 - Z^0_1 = 0): the walkers land on one site.
    double meet() const noexcept { return separation_change(-separation); }
    /// P(Z^m_1 - Z^0_1 < 0): the walkers swap order.
    double cross() const noexcept;
    /// P(Z^m_1 - Z^0_1 = separation).
    double unchanged() const noexcept { return separation_change(0); }
    /// Law of the separation increment Z^m_1 - Z^0_1 - separation.
    std::map<std::int64_t, double> increment_law() const;
};

/// Radius for which single-walker displacements beyond it have mass < tol.
std::int64_t joint_step_radius(const ModelParams& params, double tol = 1e-13);

JointStepLaw joint_step_law(const ModelParams& params, std::int64_t separation, std::int64_t radius);
JointStepLaw joint_step_law(const ModelParams& params, std::int64_t separation);

} // namespace gdnm
