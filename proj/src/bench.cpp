#include "attfilt/bench.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace attfilt {

namespace {

const char* kRunHeader =
    "t,err_att_x,err_att_y,err_att_z,err_bias_x,err_bias_y,err_bias_z,"
    "P11,P22,P33,P44,P55,P66,nees";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double inverse_normal_cdf(double p) {
    // Acklam's rational approximation, |relative error| < 1.15e-9.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

Vec3 bias_error_for(FilterKind kind, const Vec3& b_true, const FilterState& est,
                    const Vec3& alpha) {
    if (kind == FilterKind::Mekf) {
        return b_true - est.b_hat;
    }
    // Geometric definition, first-order: db = b - (I - [alpha x]) b_hat.
    return b_true - true_bias_reconstruct(alpha, est.b_hat, Vec3::Zero());
}

}  // namespace

Vec3 attitude_error(const UnitQuaternion& q_true, const UnitQuaternion& q_hat) {
    return quat_to_rotvec(quat_product(q_true, q_hat.conjugate()));
}

FilterState initial_estimate(const Scenario& sc) {
    FilterState s;
    s.q_hat = quat_product(rotvec_to_quat(sc.cfg.init_att_err),
                           sc.truth.front().q_true)
                  .normalized();
    s.b_hat = sc.truth.front().b_true + sc.cfg.init_bias_err;
    return s;
}

FilterState initial_estimate_sampled(const Scenario& sc, const Vec6& P0_diag,
                                     GaussianRng& rng) {
    Vec6 e;
    const Vec3 w1 = rng.gaussian3();
    const Vec3 w2 = rng.gaussian3();
    e << w1, w2;
    for (int i = 0; i < 6; ++i) {
        e(i) *= std::sqrt(P0_diag(i));
    }
    FilterState s;
    s.q_hat = quat_product(rotvec_to_quat(e.head<3>()), sc.truth.front().q_true)
                  .normalized();
    s.b_hat = sc.truth.front().b_true + e.tail<3>();
    return s;
}

std::vector<RunRecord> run_filter(const Scenario& sc, FilterKind kind,
                                  const FilterTuning& tuning,
                                  const FilterState& init) {
    const ErrorModel model =
        kind == FilterKind::Mekf ? ErrorModel::Classical : ErrorModel::Geometric;

    FilterState state = init;
    Covariance6 P = tuning.P0_diag.asDiagonal();

    std::vector<RunRecord> records;
    records.reserve(sc.meas.size());

    std::size_t next_epoch = 0;
    for (std::size_t k = 0; k < sc.gyro.size(); ++k) {
        std::tie(state, P) = propagate(state, P, sc.gyro[k], tuning.noise, model);

        if (next_epoch >= sc.meas.size() || sc.meas[next_epoch].gyro_index != k) {
            continue;
        }
        const MeasurementEpoch& epoch = sc.meas[next_epoch];
        MeasurementSet m = MeasurementSet::isotropic(sc.cfg.refs, epoch.obs,
                                                     tuning.sigma_meas);
        try {
            switch (kind) {
                case FilterKind::Mekf: {
                    MekfResult r = mekf_measurement_update(state, P, m,
                                                           tuning.mekf_attitude_reset);
                    state = r.state_plus;
                    P = r.P_plus;
                    break;
                }
                case FilterKind::Gmekf: {
                    GmekfOptions opts;
                    opts.reset_mode = tuning.reset_mode;
                    UpdateResult r = gmekf_measurement_update(state, P, m, opts);
                    state = r.state_plus;
                    P = r.P_plus_plus;
                    break;
                }
                case FilterKind::Gekf: {
                    UpdateResult r = gekf_measurement_update(state, P, m);
                    state = r.state_plus;
                    P = r.P_plus_plus;
                    break;
                }
            }
        } catch (const NumericalError& e) {
            std::ostringstream msg;
            msg << "run_filter: numerical failure at epoch " << next_epoch
                << " (t=" << epoch.t << "): " << e.what();
            throw NumericalError(msg.str());
        }

        const TruthState& truth = sc.truth[k + 1];
        RunRecord rec;
        rec.t = epoch.t;
        rec.err_att = attitude_error(truth.q_true, state.q_hat);
        rec.err_bias = bias_error_for(kind, truth.b_true, state, rec.err_att);
        rec.p_diag = P.diagonal();
        Vec6 e = (Vec6() << rec.err_att, rec.err_bias).finished();
        rec.nees = e.dot(P.ldlt().solve(e));
        records.push_back(rec);
        ++next_epoch;
    }
    return records;
}

EquivalenceReport equivalence_report(const Scenario& sc, const FilterTuning& tuning) {
    const FilterState init = initial_estimate(sc);
    FilterState s1 = init;  // GMEKF
    FilterState s2 = init;  // GEKF
    Covariance6 P1 = tuning.P0_diag.asDiagonal();
    Covariance6 P2 = P1;

    EquivalenceReport report;
    report.records.reserve(sc.meas.size());

    std::size_t next_epoch = 0;
    for (std::size_t k = 0; k < sc.gyro.size(); ++k) {
        std::tie(s1, P1) = propagate(s1, P1, sc.gyro[k], tuning.noise,
                                     ErrorModel::Geometric);
        std::tie(s2, P2) = propagate(s2, P2, sc.gyro[k], tuning.noise,
                                     ErrorModel::Geometric);

        if (next_epoch >= sc.meas.size() || sc.meas[next_epoch].gyro_index != k) {
            continue;
        }
        const MeasurementEpoch& epoch = sc.meas[next_epoch];
        MeasurementSet m = MeasurementSet::isotropic(sc.cfg.refs, epoch.obs,
                                                     tuning.sigma_meas);
        UpdateResult r1 = gmekf_measurement_update(s1, P1, m);
        UpdateResult r2 = gekf_measurement_update(s2, P2, m);
        s1 = r1.state_plus;
        P1 = r1.P_plus_plus;
        s2 = r2.state_plus;
        P2 = r2.P_plus_plus;

        EquivRecord rec;
        rec.t = epoch.t;
        rec.dq_rad = quat_angular_distance(s1.q_hat, s2.q_hat);
        rec.db_norm = (s1.b_hat - s2.b_hat).norm();
        rec.dP_rel = (P1 - P2).norm() / P1.norm();
        report.max_dq = std::max(report.max_dq, rec.dq_rad);
        report.max_db = std::max(report.max_db, rec.db_norm);
        report.max_dP = std::max(report.max_dP, rec.dP_rel);
        report.records.push_back(rec);
        ++next_epoch;
    }
    return report;
}

Summary summarize(const std::vector<RunRecord>& records) {
    if (records.empty()) {
        throw std::invalid_argument("summarize: no records");
    }
    const double lo = chi2_quantile(0.025, 6.0);
    const double hi = chi2_quantile(0.975, 6.0);
    Summary s;
    double att2 = 0.0;
    double bias2 = 0.0;
    std::size_t inside = 0;
    for (const RunRecord& r : records) {
        att2 += r.err_att.squaredNorm();
        bias2 += r.err_bias.squaredNorm();
        s.mean_nees += r.nees;
        if (r.nees >= lo && r.nees <= hi) {
            ++inside;
        }
    }
    const auto n = static_cast<double>(records.size());
    s.rmse_att = std::sqrt(att2 / n);
    s.rmse_bias = std::sqrt(bias2 / n);
    s.mean_nees /= n;
    s.nees_coverage = static_cast<double>(inside) / n;
    return s;
}

double chi2_quantile(double p, double df) {
    const double z = inverse_normal_cdf(p);
    const double a = 2.0 / (9.0 * df);
    const double t = 1.0 - a + z * std::sqrt(a);
    return df * t * t * t;
}

void write_run_csv(std::ostream& os, const std::vector<RunRecord>& records) {
    os << kRunHeader << "\n";
    for (const RunRecord& r : records) {
        os << fmt(r.t);
        for (int i = 0; i < 3; ++i) os << ',' << fmt(r.err_att(i));
        for (int i = 0; i < 3; ++i) os << ',' << fmt(r.err_bias(i));
        for (int i = 0; i < 6; ++i) os << ',' << fmt(r.p_diag(i));
        os << ',' << fmt(r.nees) << "\n";
    }
}

void write_equiv_csv(std::ostream& os, const EquivalenceReport& report) {
    os << "t,dq_rad,db_norm,dP_rel\n";
    for (const EquivRecord& r : report.records) {
        os << fmt(r.t) << ',' << fmt(r.dq_rad) << ',' << fmt(r.db_norm) << ','
           << fmt(r.dP_rel) << "\n";
    }
}

std::string filter_kind_name(FilterKind kind) {
    switch (kind) {
        case FilterKind::Mekf: return "mekf";
        case FilterKind::Gmekf: return "gmekf";
        case FilterKind::Gekf: return "gekf";
    }
    return "unknown";
}

}  // namespace attfilt
