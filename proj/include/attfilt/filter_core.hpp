#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "attfilt/attitude_math.hpp"

// Shared Kalman machinery: measurement model, gain, Joseph covariance update
// and the time update used by all three filters.  The 6-dimensional error
// state is ordered [attitude; bias].

namespace attfilt {

using Covariance6 = Mat6;

struct FilterState {
    UnitQuaternion q_hat;
    Vec3 b_hat{Vec3::Zero()};  // rad/s
};

struct ErrorEstimate {
    Vec3 alpha_hat{Vec3::Zero()};  // rad
    Vec3 db_hat{Vec3::Zero()};     // rad/s

    Vec6 as_vector() const {
        Vec6 v;
        v << alpha_hat, db_hat;
        return v;
    }
};

struct MeasurementSet {
    std::vector<Vec3> refs;  // unit vectors, reference frame
    std::vector<Vec3> obs;   // body frame observations
    Eigen::MatrixXd R;       // 3n x 3n

    /// Convenience constructor with block-diagonal sigma^2 * I noise.
    static MeasurementSet isotropic(std::vector<Vec3> refs, std::vector<Vec3> obs,
                                    double sigma);

    Eigen::VectorXd stacked_obs() const;
};

struct GyroSample {
    Vec3 omega_meas{Vec3::Zero()};  // rad/s
    double dt{0.0};                 // s
};

struct NoiseParams {
    double sigma_v{0.0};  // rad/s^(1/2), angle random walk
    double sigma_u{0.0};  // rad/s^(3/2), bias random walk
};

enum class ErrorModel { Classical, Geometric };

/// Thrown when the innovation covariance loses positive definiteness.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Stacked H: i-th block row [ [A(q-)*r_i x] | 0_3x3 ].
Eigen::MatrixXd measurement_matrix(const UnitQuaternion& q_minus,
                                   const std::vector<Vec3>& refs);

/// Stacked body-frame predictions A(q-)*r_i.
Eigen::VectorXd predicted_measurement(const UnitQuaternion& q_minus,
                                      const std::vector<Vec3>& refs);

/// K = P H^T (H P H^T + R)^-1 via a symmetric factorization solve.
Eigen::MatrixXd kalman_gain(const Covariance6& P_minus, const Eigen::MatrixXd& H,
                            const Eigen::MatrixXd& R);

/// Joseph form (I-KH) P (I-KH)^T + K R K^T, symmetrized.
Covariance6 joseph_update(const Covariance6& P_minus, const Eigen::MatrixXd& K,
                          const Eigen::MatrixXd& H, const Eigen::MatrixXd& R);

/// Partitioned error estimate K * (y_obs - y_pred).
ErrorEstimate error_update(const Eigen::MatrixXd& K, const Eigen::VectorXd& y_obs,
                           const Eigen::VectorXd& y_pred);

/// Continuous error-state dynamics matrix F for the chosen error model,
/// evaluated at estimated rate omega_hat and bias b_hat.
Mat6 error_dynamics(const Vec3& omega_hat, const Vec3& b_hat, ErrorModel model);

/// Second-order series transition matrix I + F dt + F^2 dt^2 / 2.
Mat6 transition_matrix(const Mat6& F, double dt);

/// Trapezoidal discrete process noise for the (sigma_v, sigma_u) gyro model.
Mat6 discrete_process_noise(const Mat6& Phi, const Vec3& b_hat,
                            const NoiseParams& noise, double dt, ErrorModel model);

/// Time update: exact quaternion propagation at omega_hat = omega_meas - b_hat,
/// bias held, P <- Phi P Phi^T + Qd.
std::pair<FilterState, Covariance6> propagate(const FilterState& state,
                                              const Covariance6& P,
                                              const GyroSample& gyro,
                                              const NoiseParams& noise,
                                              ErrorModel model);

struct MekfResult {
    FilterState state_plus;
    Covariance6 P_plus{Covariance6::Zero()};
    Eigen::VectorXd innovation;
};

/// Classical MEKF measurement update: bias update b+ = b- + db_hat, optional
/// attitude-only reset rotation P <- diag(M, I) P diag(M, I)^T.
MekfResult mekf_measurement_update(const FilterState& state_minus,
                                   const Covariance6& P_minus,
                                   const MeasurementSet& meas,
                                   bool attitude_reset = false);

/// P <- (P + P^T) / 2.
Covariance6 symmetrize(const Covariance6& P);

}  // namespace attfilt
