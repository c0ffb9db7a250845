#include "attfilt/filter_core.hpp"

#include <cmath>
#include <sstream>

namespace attfilt {

MeasurementSet MeasurementSet::isotropic(std::vector<Vec3> refs, std::vector<Vec3> obs,
                                         double sigma) {
    MeasurementSet m;
    m.R = sigma * sigma *
          Eigen::MatrixXd::Identity(3 * static_cast<int>(refs.size()),
                                    3 * static_cast<int>(refs.size()));
    m.refs = std::move(refs);
    m.obs = std::move(obs);
    return m;
}

Eigen::VectorXd MeasurementSet::stacked_obs() const {
    Eigen::VectorXd y(3 * static_cast<int>(obs.size()));
    for (size_t i = 0; i < obs.size(); ++i) {
        y.segment<3>(3 * static_cast<Eigen::Index>(i)) = obs[i];
    }
    return y;
}

Eigen::MatrixXd measurement_matrix(const UnitQuaternion& q_minus,
                                   const std::vector<Vec3>& refs) {
    if (refs.empty()) {
        throw std::invalid_argument("measurement_matrix: empty reference set");
    }
    const Mat3 A = attitude_matrix(q_minus);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3 * static_cast<int>(refs.size()), 6);
    for (size_t i = 0; i < refs.size(); ++i) {
        H.block<3, 3>(3 * static_cast<Eigen::Index>(i), 0) = cross_matrix(A * refs[i]);
    }
    return H;
}

Eigen::VectorXd predicted_measurement(const UnitQuaternion& q_minus,
                                      const std::vector<Vec3>& refs) {
    if (refs.empty()) {
        throw std::invalid_argument("predicted_measurement: empty reference set");
    }
    const Mat3 A = attitude_matrix(q_minus);
    Eigen::VectorXd y(3 * static_cast<int>(refs.size()));
    for (size_t i = 0; i < refs.size(); ++i) {
        y.segment<3>(3 * static_cast<Eigen::Index>(i)) = A * refs[i];
    }
    return y;
}

Eigen::MatrixXd kalman_gain(const Covariance6& P_minus, const Eigen::MatrixXd& H,
                            const Eigen::MatrixXd& R) {
    const Eigen::MatrixXd S = H * P_minus * H.transpose() + R;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(0.5 * (S + S.transpose()));
    const Eigen::VectorXd d = ldlt.vectorD();
    const double pivot_floor = 1e-14 * S.trace();
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= pivot_floor) {
        std::ostringstream msg;
        msg << "kalman_gain: innovation covariance not positive definite; "
            << "min pivot " << d.minCoeff() << ", max pivot " << d.maxCoeff()
            << ", pivot ratio " << d.maxCoeff() / d.minCoeff()
            << ", trace " << S.trace();
        throw NumericalError(msg.str());
    }
    // K S = P H^T  =>  K^T = S^-1 H P
    return ldlt.solve(H * P_minus).transpose();
}

Covariance6 joseph_update(const Covariance6& P_minus, const Eigen::MatrixXd& K,
                          const Eigen::MatrixXd& H, const Eigen::MatrixXd& R) {
    const Mat6 IKH = Mat6::Identity() - K * H;
    return symmetrize(IKH * P_minus * IKH.transpose() + K * R * K.transpose());
}

ErrorEstimate error_update(const Eigen::MatrixXd& K, const Eigen::VectorXd& y_obs,
                           const Eigen::VectorXd& y_pred) {
    const Vec6 dx = K * (y_obs - y_pred);
    return {dx.head<3>(), dx.tail<3>()};
}

Mat6 error_dynamics(const Vec3& omega_hat, const Vec3& b_hat, ErrorModel model) {
    Mat6 F = Mat6::Zero();
    const Mat3 wx = cross_matrix(omega_hat);
    if (model == ErrorModel::Classical) {
        F.topLeftCorner<3, 3>() = -wx;
        F.topRightCorner<3, 3>() = -Mat3::Identity();
    } else {
        // Geometric error state [alpha; db] with db = b - A(alpha) b_hat.
        // Differentiating db = Db - [b x] alpha under the classical alpha
        // dynamics (b_hat frozen during propagation) gives the coupled form.
        const Mat3 bx = cross_matrix(b_hat);
        F.topLeftCorner<3, 3>() = -(wx + bx);
        F.topRightCorner<3, 3>() = -Mat3::Identity();
        F.bottomLeftCorner<3, 3>() = bx * (wx + bx);
        F.bottomRightCorner<3, 3>() = bx;
    }
    return F;
}

Mat6 transition_matrix(const Mat6& F, double dt) {
    return Mat6::Identity() + F * dt + 0.5 * (F * F) * (dt * dt);
}

Mat6 discrete_process_noise(const Mat6& Phi, const Vec3& b_hat,
                            const NoiseParams& noise, double dt, ErrorModel model) {
    // Continuous noise input: alpha_dot gets -n_v, Db_dot gets n_u; in the
    // geometric model db_dot additionally picks up [b_hat x] n_v.
    Mat6 G = Mat6::Zero();
    G.topLeftCorner<3, 3>() = -Mat3::Identity();
    G.bottomRightCorner<3, 3>() = Mat3::Identity();
    if (model == ErrorModel::Geometric) {
        G.bottomLeftCorner<3, 3>() = cross_matrix(b_hat);
    }
    Mat6 W = Mat6::Zero();
    W.topLeftCorner<3, 3>() = noise.sigma_v * noise.sigma_v * Mat3::Identity();
    W.bottomRightCorner<3, 3>() = noise.sigma_u * noise.sigma_u * Mat3::Identity();
    const Mat6 Qc = G * W * G.transpose();
    return symmetrize(0.5 * dt * (Phi * Qc * Phi.transpose() + Qc));
}

std::pair<FilterState, Covariance6> propagate(const FilterState& state,
                                              const Covariance6& P,
                                              const GyroSample& gyro,
                                              const NoiseParams& noise,
                                              ErrorModel model) {
    if (!(gyro.dt > 0.0) || !std::isfinite(gyro.dt)) {
        throw std::invalid_argument("propagate: dt must be positive and finite");
    }
    const Vec3 omega_hat = gyro.omega_meas - state.b_hat;
    FilterState out;
    out.q_hat = quat_product(rotvec_to_quat(omega_hat * gyro.dt), state.q_hat).normalized();
    out.b_hat = state.b_hat;

    const Mat6 F = error_dynamics(omega_hat, state.b_hat, model);
    const Mat6 Phi = transition_matrix(F, gyro.dt);
    const Mat6 Qd = discrete_process_noise(Phi, state.b_hat, noise, gyro.dt, model);
    return {out, symmetrize(Phi * P * Phi.transpose() + Qd)};
}

MekfResult mekf_measurement_update(const FilterState& state_minus,
                                   const Covariance6& P_minus,
                                   const MeasurementSet& meas,
                                   bool attitude_reset) {
    const Eigen::MatrixXd H = measurement_matrix(state_minus.q_hat, meas.refs);
    const Eigen::MatrixXd K = kalman_gain(P_minus, H, meas.R);
    const Eigen::VectorXd y_pred = predicted_measurement(state_minus.q_hat, meas.refs);
    const Eigen::VectorXd y_obs = meas.stacked_obs();
    const Covariance6 P_plus = joseph_update(P_minus, K, H, meas.R);
    const ErrorEstimate dx = error_update(K, y_obs, y_pred);

    MekfResult r;
    r.state_plus.q_hat = quat_correct(state_minus.q_hat, dx.alpha_hat);
    r.state_plus.b_hat = state_minus.b_hat + dx.db_hat;
    r.innovation = y_obs - y_pred;
    if (attitude_reset) {
        Mat6 Mbar = Mat6::Identity();
        Mbar.topLeftCorner<3, 3>() = reset_map(state_minus.q_hat, r.state_plus.q_hat);
        r.P_plus = symmetrize(Mbar * P_plus * Mbar.transpose());
    } else {
        r.P_plus = P_plus;
    }
    return r;
}

Covariance6 symmetrize(const Covariance6& P) {
    return 0.5 * (P + P.transpose());
}

}  // namespace attfilt
