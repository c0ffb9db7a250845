#include "attfilt/attitude_math.hpp"

#include <cmath>
#include <stdexcept>

namespace attfilt {

namespace {

void require_unit(const UnitQuaternion& q, const char* who) {
    if (std::abs(q.norm() - 1.0) > 1e-6) {
        throw std::invalid_argument(std::string(who) + ": quaternion is not unit-norm");
    }
}

}  // namespace

UnitQuaternion UnitQuaternion::from_coeffs(double x, double y, double z, double w) {
    return UnitQuaternion{x, y, z, w}.normalized();
}

double UnitQuaternion::norm() const {
    return std::sqrt(x * x + y * y + z * z + w * w);
}

UnitQuaternion UnitQuaternion::normalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw std::invalid_argument("UnitQuaternion: cannot normalize zero or non-finite quaternion");
    }
    return {x / n, y / n, z / n, w / n};
}

Mat3 cross_matrix(const Vec3& v) {
    Mat3 s;
    s << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
        -v.y(), v.x(), 0.0;
    return s;
}

Mat4x3 xi(const UnitQuaternion& q) {
    require_unit(q, "xi");
    Mat4x3 out;
    out.topRows<3>() = q.w * Mat3::Identity() + cross_matrix(q.vec());
    out.row(3) = -q.vec().transpose();
    return out;
}

Mat3 attitude_matrix(const UnitQuaternion& q) {
    require_unit(q, "attitude_matrix");
    const Vec3 rho = q.vec();
    return (q.w * q.w - rho.squaredNorm()) * Mat3::Identity()
           + 2.0 * rho * rho.transpose()
           - 2.0 * q.w * cross_matrix(rho);
}

Mat3 small_angle_dcm(const Vec3& alpha) {
    return Mat3::Identity() - cross_matrix(alpha);
}

UnitQuaternion quat_correct(const UnitQuaternion& q_minus, const Vec3& alpha_hat) {
    if (alpha_hat.isZero(0.0)) {
        return q_minus;
    }
    const Eigen::Vector4d raw = q_minus.coeffs() + 0.5 * xi(q_minus) * alpha_hat;
    return UnitQuaternion::from_coeffs(raw(0), raw(1), raw(2), raw(3));
}

Mat3 reset_map(const UnitQuaternion& q_minus, const UnitQuaternion& q_plus) {
    return xi(q_plus).transpose() * xi(q_minus);
}

UnitQuaternion quat_product(const UnitQuaternion& p, const UnitQuaternion& q) {
    const Vec3 pv = p.vec();
    const Vec3 qv = q.vec();
    const Vec3 v = p.w * qv + q.w * pv - pv.cross(qv);
    const double w = p.w * q.w - pv.dot(qv);
    return {v.x(), v.y(), v.z(), w};
}

UnitQuaternion rotvec_to_quat(const Vec3& alpha) {
    const double theta = alpha.norm();
    double s;  // sin(theta/2)/theta
    if (theta < 1e-8) {
        s = 0.5 - theta * theta / 48.0;
    } else {
        s = std::sin(0.5 * theta) / theta;
    }
    const Vec3 v = s * alpha;
    return {v.x(), v.y(), v.z(), std::cos(0.5 * theta)};
}

Vec3 quat_to_rotvec(const UnitQuaternion& q_in) {
    UnitQuaternion q = q_in.w < 0.0 ? q_in.negated() : q_in;
    const double nv = q.vec().norm();
    if (nv < 1e-12) {
        return 2.0 * q.vec();
    }
    const double theta = 2.0 * std::atan2(nv, q.w);
    return (theta / nv) * q.vec();
}

double quat_angular_distance(const UnitQuaternion& q1, const UnitQuaternion& q2) {
    UnitQuaternion dq = quat_product(q1, q2.conjugate());
    if (dq.w < 0.0) {
        dq = dq.negated();
    }
    return 2.0 * dq.vec().norm();
}

}  // namespace attfilt
