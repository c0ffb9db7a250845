#include "attfilt/gmekf.hpp"

namespace attfilt {

Vec3 bias_update(const Vec3& b_minus, const Vec3& alpha_hat, const Vec3& db_hat) {
    return b_minus + cross_matrix(b_minus) * alpha_hat + db_hat;
}

std::pair<Covariance6, ResetReport> reset_covariance(const Covariance6& P_plus,
                                                     const UnitQuaternion& q_minus,
                                                     const UnitQuaternion& q_plus,
                                                     const Vec3& b_minus,
                                                     const Vec3& b_plus) {
    ResetReport rep;
    rep.M = reset_map(q_minus, q_plus);
    rep.b_minus = b_minus;
    rep.b_plus = b_plus;
    rep.M_bar = Mat6::Identity();
    rep.M_bar.topLeftCorner<3, 3>() = rep.M;
    rep.M_bar.bottomLeftCorner<3, 3>() =
        cross_matrix(b_minus) - cross_matrix(b_plus) * rep.M;
    return {symmetrize(rep.M_bar * P_plus * rep.M_bar.transpose()), rep};
}

Vec3 true_bias_reconstruct(const Vec3& alpha, const Vec3& b_hat, const Vec3& db) {
    return small_angle_dcm(alpha) * b_hat + db;
}

UpdateResult gmekf_measurement_update(const FilterState& state_minus,
                                      const Covariance6& P_minus,
                                      const MeasurementSet& meas,
                                      const GmekfOptions& opts) {
    const Eigen::MatrixXd H = measurement_matrix(state_minus.q_hat, meas.refs);
    const Eigen::MatrixXd K = kalman_gain(P_minus, H, meas.R);
    const Eigen::VectorXd y_pred = predicted_measurement(state_minus.q_hat, meas.refs);
    const Eigen::VectorXd y_obs = meas.stacked_obs();

    const Covariance6 P_plus = joseph_update(P_minus, K, H, meas.R);
    const ErrorEstimate dx = error_update(K, y_obs, y_pred);

    UpdateResult r;
    r.innovation = y_obs - y_pred;
    r.state_plus.q_hat = quat_correct(state_minus.q_hat, dx.alpha_hat);
    r.state_plus.b_hat = bias_update(state_minus.b_hat, dx.alpha_hat, dx.db_hat);

    // Error estimate is reset to zero here by construction; only the
    // covariance bookkeeping of that reset remains.
    switch (opts.reset_mode) {
        case ResetMode::Full: {
            auto [P_pp, rep] = reset_covariance(P_plus, state_minus.q_hat,
                                                r.state_plus.q_hat, state_minus.b_hat,
                                                r.state_plus.b_hat);
            r.P_plus_plus = P_pp;
            r.report = rep;
            break;
        }
        case ResetMode::AttitudeOnly: {
            r.report.M = reset_map(state_minus.q_hat, r.state_plus.q_hat);
            r.report.M_bar = Mat6::Identity();
            r.report.M_bar.topLeftCorner<3, 3>() = r.report.M;
            r.report.b_minus = state_minus.b_hat;
            r.report.b_plus = r.state_plus.b_hat;
            r.P_plus_plus = symmetrize(r.report.M_bar * P_plus * r.report.M_bar.transpose());
            break;
        }
        case ResetMode::None:
            r.report.M = reset_map(state_minus.q_hat, r.state_plus.q_hat);
            r.report.b_minus = state_minus.b_hat;
            r.report.b_plus = r.state_plus.b_hat;
            r.P_plus_plus = P_plus;
            break;
    }
    r.report.alpha_hat = dx.alpha_hat;
    r.report.db_hat = dx.db_hat;
    r.report.large_correction = dx.alpha_hat.norm() > 0.35;
    return r;
}

}  // namespace attfilt
