#pragma once

#include "attfilt/gmekf.hpp"

// Covariance-projection GEKF, implemented over the seven-component
// (quaternion + bias) state so the GMEKF equivalence can be tested
// differentially rather than by construction.

namespace attfilt {

using Mat7x6 = Eigen::Matrix<double, 7, 6>;

/// Sensitivity matrix [[0.5 Xi(q-), 0],[ [b- x], I ]].
Mat7x6 sensitivity_c(const UnitQuaternion& q_minus, const Vec3& b_minus);

/// Stacked 3n x 7 measurement Jacobian with block rows
/// [ 2 [A(q-) r_i x] Xi^T(q-) | 0_3x3 ].
Eigen::MatrixXd htilde(const UnitQuaternion& q_minus, const std::vector<Vec3>& refs);

/// H_bar = htilde * sensitivity_c; equals the MEKF measurement matrix.
Eigen::MatrixXd hbar(const UnitQuaternion& q_minus, const Vec3& b_minus,
                     const std::vector<Vec3>& refs);

UpdateResult gekf_measurement_update(const FilterState& state_minus,
                                     const Covariance6& P_minus,
                                     const MeasurementSet& meas);

}  // namespace attfilt
