#pragma once

#include <utility>

#include "attfilt/filter_core.hpp"

// Geometric MEKF measurement update: common-frame bias error, global
// quaternion/bias updates, error reset and the reset covariance modification.

namespace attfilt {

struct ResetReport {
    Mat3 M{Mat3::Identity()};
    Mat6 M_bar{Mat6::Identity()};
    Vec3 b_minus{Vec3::Zero()};
    Vec3 b_plus{Vec3::Zero()};
    Vec3 alpha_hat{Vec3::Zero()};
    Vec3 db_hat{Vec3::Zero()};
    // Set when ||alpha_hat|| exceeds 0.35 rad and the small-angle bias
    // update is suspect.
    bool large_correction{false};
};

struct UpdateResult {
    FilterState state_plus;
    Covariance6 P_plus_plus{Covariance6::Zero()};
    ResetReport report;
    Eigen::VectorXd innovation;
};

/// How the covariance is transformed after the error reset.
enum class ResetMode {
    Full,          // M_bar of the geometric derivation (default)
    AttitudeOnly,  // diag(M, I): classical attitude-only reset rotation
    None,          // keep the Joseph covariance unchanged
};

struct GmekfOptions {
    ResetMode reset_mode{ResetMode::Full};
};

/// Geometric bias update b+ = b- + [b- x] alpha_hat + db_hat.
Vec3 bias_update(const Vec3& b_minus, const Vec3& alpha_hat, const Vec3& db_hat);

/// Builds M and M_bar from the pre/post update state pair and returns
/// P++ = M_bar P+ M_bar^T, symmetrized.
std::pair<Covariance6, ResetReport> reset_covariance(const Covariance6& P_plus,
                                                     const UnitQuaternion& q_minus,
                                                     const UnitQuaternion& q_plus,
                                                     const Vec3& b_minus,
                                                     const Vec3& b_plus);

/// First-order common-frame reconstruction of the true bias:
/// (I - [alpha x]) b_hat + db.
Vec3 true_bias_reconstruct(const Vec3& alpha, const Vec3& b_hat, const Vec3& db);

UpdateResult gmekf_measurement_update(const FilterState& state_minus,
                                      const Covariance6& P_minus,
                                      const MeasurementSet& meas,
                                      const GmekfOptions& opts = {});

}  // namespace attfilt
