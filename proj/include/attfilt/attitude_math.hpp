#pragma once

#include <Eigen/Dense>

// Quaternion and rotation algebra shared by every filter variant.
//
// Conventions (fixed throughout the library):
//  - Quaternions are scalar-last: [x, y, z, w].
//  - attitude_matrix(q) is the passive reference-to-body DCM, so a predicted
//    body-frame observation of reference vector r is A(q) * r.
//  - quat_product(p, q) composes so that A(p*q) = A(p) * A(q); the error
//    quaternion of a true attitude q against an estimate q_hat is
//    dq = quat_product(q, conjugate(q_hat)).

namespace attfilt {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4x3 = Eigen::Matrix<double, 4, 3>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct UnitQuaternion {
    double x{0.0};
    double y{0.0};
    double z{0.0};
    double w{1.0};

    static UnitQuaternion identity() { return {}; }

    /// Builds from raw coefficients and normalizes.
    static UnitQuaternion from_coeffs(double x, double y, double z, double w);

    Vec3 vec() const { return {x, y, z}; }
    Eigen::Vector4d coeffs() const { return {x, y, z, w}; }

    double norm() const;
    UnitQuaternion normalized() const;
    UnitQuaternion conjugate() const { return {-x, -y, -z, w}; }
    UnitQuaternion negated() const { return {-x, -y, -z, -w}; }
};

/// Skew-symmetric matrix S with S*u = v x u.
Mat3 cross_matrix(const Vec3& v);

/// 4x3 quaternion kinematics matrix: top block w*I + [rho x], bottom row
/// -rho^T.  Satisfies Xi^T Xi = I and Xi^T q = 0.  Throws
/// std::invalid_argument when |q| deviates from 1 by more than 1e-6.
Mat4x3 xi(const UnitQuaternion& q);

/// Passive reference-to-body direction cosine matrix.  Same unit-norm
/// contract as xi().
Mat3 attitude_matrix(const UnitQuaternion& q);

/// First-order DCM of a small rotation vector: I - [alpha x].
Mat3 small_angle_dcm(const Vec3& alpha);

/// Additive quaternion correction q+ = q- + 0.5 * Xi(q-) * alpha_hat,
/// renormalized.  alpha_hat = 0 returns q_minus unchanged.
UnitQuaternion quat_correct(const UnitQuaternion& q_minus, const Vec3& alpha_hat);

/// Reset map M = Xi^T(q+) * Xi(q-), always the exact product form.
Mat3 reset_map(const UnitQuaternion& q_minus, const UnitQuaternion& q_plus);

/// Composition with A(p*q) = A(p) * A(q).
UnitQuaternion quat_product(const UnitQuaternion& p, const UnitQuaternion& q);

/// Exact rotation-vector to quaternion map, series-expanded below 1e-8 rad.
UnitQuaternion rotvec_to_quat(const Vec3& alpha);

/// Rotation vector of q, sign-aligned to the hemisphere with w >= 0.
Vec3 quat_to_rotvec(const UnitQuaternion& q);

/// Double-cover-safe angular distance: 2*||vec(q1 * q2^-1)|| with sign
/// alignment, in radians.
double quat_angular_distance(const UnitQuaternion& q1, const UnitQuaternion& q2);

}  // namespace attfilt
