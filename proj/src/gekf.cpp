#include "attfilt/gekf.hpp"

namespace attfilt {

Mat7x6 sensitivity_c(const UnitQuaternion& q_minus, const Vec3& b_minus) {
    Mat7x6 C = Mat7x6::Zero();
    C.topLeftCorner<4, 3>() = 0.5 * xi(q_minus);
    C.bottomLeftCorner<3, 3>() = cross_matrix(b_minus);
    C.bottomRightCorner<3, 3>() = Mat3::Identity();
    return C;
}

Eigen::MatrixXd htilde(const UnitQuaternion& q_minus, const std::vector<Vec3>& refs) {
    if (refs.empty()) {
        throw std::invalid_argument("htilde: empty reference set");
    }
    const Mat3 A = attitude_matrix(q_minus);
    const Mat4x3 Xi = xi(q_minus);
    Eigen::MatrixXd Ht = Eigen::MatrixXd::Zero(3 * static_cast<int>(refs.size()), 7);
    for (size_t i = 0; i < refs.size(); ++i) {
        Ht.block<3, 4>(3 * static_cast<Eigen::Index>(i), 0) =
            2.0 * cross_matrix(A * refs[i]) * Xi.transpose();
    }
    return Ht;
}

Eigen::MatrixXd hbar(const UnitQuaternion& q_minus, const Vec3& b_minus,
                     const std::vector<Vec3>& refs) {
    return htilde(q_minus, refs) * sensitivity_c(q_minus, b_minus);
}

UpdateResult gekf_measurement_update(const FilterState& state_minus,
                                     const Covariance6& P_minus,
                                     const MeasurementSet& meas) {
    const Eigen::MatrixXd Hb = hbar(state_minus.q_hat, state_minus.b_hat, meas.refs);
    const Eigen::MatrixXd Kb = kalman_gain(P_minus, Hb, meas.R);
    const Eigen::VectorXd y_pred = predicted_measurement(state_minus.q_hat, meas.refs);
    const Eigen::VectorXd y_obs = meas.stacked_obs();

    const Covariance6 P_plus = joseph_update(P_minus, Kb, Hb, meas.R);

    // Seven-component additive state update through the sensitivity matrix,
    // then quaternion renormalization.
    const Mat7x6 C = sensitivity_c(state_minus.q_hat, state_minus.b_hat);
    const Eigen::Matrix<double, 7, 1> delta = C * (Kb * (y_obs - y_pred));

    UpdateResult r;
    r.innovation = y_obs - y_pred;
    const Eigen::Vector4d q_raw = state_minus.q_hat.coeffs() + delta.head<4>();
    if (delta.head<4>().isZero(0.0)) {
        r.state_plus.q_hat = state_minus.q_hat;
    } else {
        r.state_plus.q_hat =
            UnitQuaternion::from_coeffs(q_raw(0), q_raw(1), q_raw(2), q_raw(3));
    }
    r.state_plus.b_hat = state_minus.b_hat + delta.tail<3>();

    auto [P_pp, rep] = reset_covariance(P_plus, state_minus.q_hat, r.state_plus.q_hat,
                                        state_minus.b_hat, r.state_plus.b_hat);
    r.P_plus_plus = P_pp;
    r.report = rep;
    const Vec6 dx = Kb * (y_obs - y_pred);
    r.report.alpha_hat = dx.head<3>();
    r.report.db_hat = dx.tail<3>();
    r.report.large_correction = r.report.alpha_hat.norm() > 0.35;
    return r;
}

}  // namespace attfilt
