#include <doctest.h>

#include "attfilt/gmekf.hpp"
#include "oracles.hpp"

using namespace attfilt;

namespace {

std::vector<Vec3> exact_obs(const UnitQuaternion& q, const std::vector<Vec3>& refs) {
    std::vector<Vec3> o;
    const Mat3 A = attitude_matrix(q);
    for (const auto& r : refs) o.push_back(A * r);
    return o;
}

// Exact post-reset errors of a truth (q, b) against an estimate pair.
struct ExtractedError {
    Vec3 alpha;
    Vec3 db;
};

ExtractedError extract_error(const UnitQuaternion& q_true, const Vec3& b_true,
                             const UnitQuaternion& q_hat, const Vec3& b_hat) {
    const UnitQuaternion dq = quat_product(q_true, q_hat.conjugate()).normalized();
    return {quat_to_rotvec(dq), b_true - attitude_matrix(dq) * b_hat};
}

}  // namespace

TEST_CASE("bias_update") {
    const Vec3 b(0.3, -0.1, 0.2);
    CHECK((bias_update(b, Vec3::Zero(), Vec3::Zero()) - b).norm() == 0.0);

    const Vec3 db(1e-3, 2e-3, -5e-4);
    CHECK((bias_update(Vec3::Zero(), Vec3(0.1, 0.2, 0.3), db) - db).norm() == 0.0);

    // b x a computed componentwise: (0.01,0,0) x (0,0.02,0) = (0,0,2e-4).
    const Vec3 bp = bias_update(Vec3(0.01, 0, 0), Vec3(0, 0.02, 0), Vec3::Zero());
    CHECK((bp - Vec3(0.01, 0.0, 2e-4)).cwiseAbs().maxCoeff() < 1e-18);

    oracle::Rng rng(71);
    for (int i = 0; i < 100; ++i) {
        const Vec3 bm = rng.vec3(0.05);
        const Vec3 a = rng.vec3(0.01);
        const Vec3 d = rng.vec3(0.001);
        CHECK((bias_update(bm, a, d) - (bm + oracle::cross(bm, a) + d))
                  .cwiseAbs()
                  .maxCoeff() < 1e-16);
    }
}

TEST_CASE("reset_covariance no-op and zero-bias structure") {
    oracle::Rng rng(73);
    const UnitQuaternion q = rng.unit_quaternion();
    const Vec3 b = rng.vec3(0.02);
    const Covariance6 P = rng.spd6(1e-4);

    auto [P_same, rep_same] = reset_covariance(P, q, q, b, b);
    CHECK((P_same - P).norm() / P.norm() < 1e-13);
    CHECK((rep_same.M - Mat3::Identity()).norm() < 1e-14);
    CHECK(rep_same.M_bar.bottomLeftCorner<3, 3>().norm() < 1e-14);

    // Zero bias on both sides: M_bar = diag(M, I).
    const UnitQuaternion qp = quat_correct(q, Vec3(0.01, -0.02, 0.005));
    auto [P_zb, rep_zb] = reset_covariance(P, q, qp, Vec3::Zero(), Vec3::Zero());
    CHECK(rep_zb.M_bar.bottomLeftCorner<3, 3>().isZero(0.0));
    CHECK(rep_zb.M_bar.topRightCorner<3, 3>().isZero(0.0));
    CHECK((rep_zb.M_bar.bottomRightCorner<3, 3>() - Mat3::Identity()).isZero(0.0));
    const Mat3 M = rep_zb.M;
    CHECK((P_zb.topLeftCorner<3, 3>() -
           M * P.topLeftCorner<3, 3>() * M.transpose())
              .norm() < 1e-16);
    CHECK((P_zb.topRightCorner<3, 3>() - M * P.topRightCorner<3, 3>()).norm() <
          1e-16);

    // Block-triangular structure: det(M_bar) = det(M).
    auto [P_full, rep] = reset_covariance(P, q, qp, b, rng.vec3(0.02));
    CHECK(rep.M_bar.determinant() ==
          doctest::Approx(rep.M.determinant()).epsilon(1e-12));
}

TEST_CASE("reset_covariance matches the sampled post-reset error covariance") {
    // Sampling oracle over the reset relations: draw pre-reset errors from
    // P+, build the exact truth, re-extract errors against the updated
    // estimate, and compare the sample covariance with M_bar P+ M_bar^T.
    oracle::Rng rng(79);
    const UnitQuaternion q_minus = rng.unit_quaternion();
    const Vec3 b_minus = rng.vec3(0.02);

    const double scale = 1e-3;
    const Covariance6 P_plus = rng.spd6(scale * scale);
    const Eigen::LLT<Mat6> chol(P_plus);
    const Mat6 L = chol.matrixL();

    const Vec3 alpha_hat = rng.vec3(scale);
    const Vec3 db_hat = rng.vec3(scale);
    const UnitQuaternion q_plus = quat_correct(q_minus, alpha_hat);
    const Vec3 b_plus = bias_update(b_minus, alpha_hat, db_hat);

    auto [P_pp, rep] = reset_covariance(P_plus, q_minus, q_plus, b_minus, b_plus);

    const int n_samples = 100000;
    Mat6 acc = Mat6::Zero();
    for (int s = 0; s < n_samples; ++s) {
        Vec6 w;
        for (int i = 0; i < 6; ++i) w(i) = rng.gaussian();
        const Vec6 dx = L * w;  // pre-reset error about the estimate
        const Vec3 alpha_plus = alpha_hat + dx.head<3>();
        const Vec3 db_plus = db_hat + dx.tail<3>();

        // Truth consistent with the pre-reset errors (exact maps).
        const UnitQuaternion dq = rotvec_to_quat(alpha_plus);
        const UnitQuaternion q_true = quat_product(dq, q_minus).normalized();
        const Vec3 b_true = attitude_matrix(dq) * b_minus + db_plus;

        const ExtractedError e = extract_error(q_true, b_true, q_plus, b_plus);
        Vec6 post;
        post << e.alpha, e.db;
        acc += post * post.transpose();
    }
    const Mat6 sample_cov = acc / n_samples;
    const double rel = (sample_cov - P_pp).norm() / P_pp.norm();
    CHECK(rel < 0.05);
}

TEST_CASE("true_bias_reconstruct basics") {
    const Vec3 b(0.1, 0.2, -0.3);
    CHECK((true_bias_reconstruct(Vec3::Zero(), b, Vec3::Zero()) - b).norm() == 0.0);
    const Vec3 db(1e-3, -2e-3, 0.0);
    CHECK((true_bias_reconstruct(Vec3(0.1, 0.2, 0.3), Vec3::Zero(), db) - db)
              .norm() == 0.0);
}

TEST_CASE("pre/post-reset bias reconstruction agrees to first order") {
    oracle::Rng rng(83);
    for (int i = 0; i < 1000; ++i) {
        const UnitQuaternion q_minus = rng.unit_quaternion();
        const Vec3 b_minus = rng.vec3(0.05);

        Vec3 alpha_hat = rng.vec3(3e-3);
        Vec3 db_hat = rng.vec3(1e-3);
        const UnitQuaternion q_plus = quat_correct(q_minus, alpha_hat);
        const Vec3 b_plus = bias_update(b_minus, alpha_hat, db_hat);

        // True errors, independent of the estimated correction.
        Vec3 alpha = rng.vec3(3e-3);
        if (alpha.norm() > 1e-2) alpha *= 1e-2 / alpha.norm();
        const Vec3 db = rng.vec3(1e-3);

        const UnitQuaternion dq = rotvec_to_quat(alpha);
        const UnitQuaternion q_true = quat_product(dq, q_minus).normalized();
        const Vec3 b_true = attitude_matrix(dq) * b_minus + db;

        const ExtractedError post = extract_error(q_true, b_true, q_plus, b_plus);

        const Vec3 lhs = true_bias_reconstruct(alpha, b_minus, db);
        const Vec3 rhs = true_bias_reconstruct(post.alpha, b_plus, post.db);
        const double amax = std::max(alpha.norm(), post.alpha.norm());
        const double bmax = std::max(b_minus.norm(), b_plus.norm());
        CHECK((lhs - rhs).norm() <= 2.0 * amax * amax * bmax + 1e-15);
    }
}

TEST_CASE("gmekf zero-innovation update") {
    oracle::Rng rng(89);
    FilterState s;
    s.q_hat = rng.unit_quaternion();
    s.b_hat = rng.vec3(0.02);
    const Covariance6 P = rng.spd6(1e-4);
    const std::vector<Vec3> refs{Vec3::UnitX(), Vec3::UnitY()};
    const auto m = MeasurementSet::isotropic(refs, exact_obs(s.q_hat, refs), 1e-4);

    const UpdateResult r = gmekf_measurement_update(s, P, m);
    CHECK(quat_angular_distance(r.state_plus.q_hat, s.q_hat) == 0.0);
    CHECK((r.state_plus.b_hat - s.b_hat).norm() == 0.0);
    CHECK((r.report.M_bar - Mat6::Identity()).norm() < 1e-14);

    // M_bar = I means P++ is exactly the Joseph covariance.
    const auto H = measurement_matrix(s.q_hat, refs);
    const auto K = kalman_gain(P, H, m.R);
    CHECK((r.P_plus_plus - joseph_update(P, K, H, m.R)).norm() / P.norm() < 1e-12);
}

TEST_CASE("gmekf update: correction lies in the gain column space") {
    oracle::Rng rng(97);
    FilterState s;
    s.q_hat = rng.unit_quaternion();
    s.b_hat = rng.vec3(0.02);
    const Covariance6 P = rng.spd6(1e-4);
    const std::vector<Vec3> refs{Vec3::UnitZ()};
    const UnitQuaternion q_true =
        quat_product(rotvec_to_quat(Vec3(2e-3, -1e-3, 3e-3)), s.q_hat);
    const auto m = MeasurementSet::isotropic(refs, exact_obs(q_true, refs), 1e-4);

    const UpdateResult r = gmekf_measurement_update(s, P, m);
    const auto H = measurement_matrix(s.q_hat, refs);
    const auto K = kalman_gain(P, H, m.R);
    // alpha_hat = K_att * innovation: residual of the least-squares fit is zero.
    const Eigen::MatrixXd K_att = K.topRows<3>();
    const Eigen::VectorXd coeffs =
        K_att.colPivHouseholderQr().solve(r.report.alpha_hat);
    CHECK((K_att * coeffs - r.report.alpha_hat).norm() < 1e-12);
    CHECK((r.P_plus_plus - r.P_plus_plus.transpose()).norm() / r.P_plus_plus.norm() <
          1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat6>(r.P_plus_plus)
              .eigenvalues()
              .minCoeff() > -1e-10 * r.P_plus_plus.trace());
    CHECK(r.state_plus.q_hat.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gmekf degenerates to mekf with attitude reset when bias is inert") {
    // Null bias involvement: zero bias estimate with zero bias covariance,
    // so the gain's bias rows vanish and the updated bias stays zero.
    oracle::Rng rng(101);
    FilterState s;
    s.q_hat = rng.unit_quaternion();
    s.b_hat = Vec3::Zero();
    Covariance6 P = Covariance6::Zero();
    P.topLeftCorner<3, 3>() = rng.spd6(1e-4).topLeftCorner<3, 3>();

    const std::vector<Vec3> refs{Vec3::UnitX(), Vec3::UnitY()};
    const UnitQuaternion q_true =
        quat_product(rotvec_to_quat(Vec3(-2e-3, 1e-3, 4e-3)), s.q_hat);
    const auto m = MeasurementSet::isotropic(refs, exact_obs(q_true, refs), 1e-4);

    const UpdateResult g = gmekf_measurement_update(s, P, m);
    const MekfResult c = mekf_measurement_update(s, P, m, /*attitude_reset=*/true);

    CHECK(g.state_plus.b_hat.norm() < 1e-18);
    CHECK(quat_angular_distance(g.state_plus.q_hat, c.state_plus.q_hat) < 1e-12);
    CHECK((g.state_plus.b_hat - c.state_plus.b_hat).norm() < 1e-12);
    CHECK((g.P_plus_plus - c.P_plus).norm() < 1e-12 * (1.0 + c.P_plus.norm()));
    CHECK((g.report.M_bar.bottomLeftCorner<3, 3>()).norm() < 1e-18);
}

TEST_CASE("gmekf reset mode ablation") {
    oracle::Rng rng(103);
    FilterState s;
    s.q_hat = rng.unit_quaternion();
    s.b_hat = rng.vec3(0.02);
    const Covariance6 P = rng.spd6(1e-4);
    const std::vector<Vec3> refs{Vec3::UnitX(), Vec3::UnitZ()};
    const UnitQuaternion q_true =
        quat_product(rotvec_to_quat(Vec3(1e-3, 2e-3, -1e-3)), s.q_hat);
    const auto m = MeasurementSet::isotropic(refs, exact_obs(q_true, refs), 1e-4);

    GmekfOptions off;
    off.reset_mode = ResetMode::None;
    GmekfOptions att_only;
    att_only.reset_mode = ResetMode::AttitudeOnly;

    const UpdateResult full = gmekf_measurement_update(s, P, m);
    const UpdateResult none = gmekf_measurement_update(s, P, m, off);
    const UpdateResult att = gmekf_measurement_update(s, P, m, att_only);

    // States agree regardless of the covariance bookkeeping.
    CHECK(quat_angular_distance(full.state_plus.q_hat, none.state_plus.q_hat) == 0.0);
    CHECK((full.state_plus.b_hat - att.state_plus.b_hat).norm() == 0.0);

    // None keeps the Joseph covariance; AttitudeOnly applies diag(M, I).
    Mat6 Mbar_att = Mat6::Identity();
    Mbar_att.topLeftCorner<3, 3>() = full.report.M;
    CHECK((att.P_plus_plus -
           symmetrize(Mbar_att * none.P_plus_plus * Mbar_att.transpose()))
              .norm() < 1e-16);
    CHECK((full.P_plus_plus - none.P_plus_plus).norm() > 0.0);
}

TEST_CASE("gmekf flags large corrections") {
    oracle::Rng rng(107);
    FilterState s;
    s.q_hat = UnitQuaternion::identity();
    s.b_hat = Vec3::Zero();
    Covariance6 P = Covariance6::Identity();  // huge prior, tiny R -> big alpha
    const std::vector<Vec3> refs{Vec3::UnitX(), Vec3::UnitY()};
    const UnitQuaternion q_true = rotvec_to_quat(Vec3(0.0, 0.0, 1.2));
    const auto m = MeasurementSet::isotropic(refs, exact_obs(q_true, refs), 1e-5);
    const UpdateResult r = gmekf_measurement_update(s, P, m);
    CHECK(r.report.large_correction);
}
