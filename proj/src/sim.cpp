#include "attfilt/sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace attfilt {

double GaussianRng::uniform01() {
    // 53-bit mantissa draw in (0, 1]; avoids log(0) in Box-Muller.
    const std::uint64_t r = engine_();
    return (static_cast<double>(r >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianRng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    has_spare_ = true;
    return mag * std::cos(ang);
}

Vec3 GaussianRng::gaussian3() {
    const double a = gaussian();
    const double b = gaussian();
    const double c = gaussian();
    return {a, b, c};
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t tag) {
    // splitmix64 finalizer
    std::uint64_t z = seed ^ (tag * 0x9E3779B97F4A7C15ull);
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

TruthState step_truth(const TruthState& s, const Vec3& omega_true, double dt,
                      const NoiseParams& noise, GaussianRng& rng) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("step_truth: dt must be positive");
    }
    TruthState out;
    out.q_true = quat_product(rotvec_to_quat(omega_true * dt), s.q_true).normalized();
    out.b_true = s.b_true + noise.sigma_u * std::sqrt(dt) * rng.gaussian3();
    out.t = s.t + dt;
    return out;
}

GyroSample gyro_measure(const Vec3& omega_true, const Vec3& b_true, double dt,
                        const NoiseParams& noise, GaussianRng& rng) {
    GyroSample g;
    g.dt = dt;
    g.omega_meas = omega_true + b_true + noise.sigma_v / std::sqrt(dt) * rng.gaussian3();
    return g;
}

std::vector<Vec3> vector_measure(const UnitQuaternion& q_true,
                                 const std::vector<Vec3>& refs, double sigma_meas,
                                 GaussianRng& rng) {
    const Mat3 A = attitude_matrix(q_true);
    std::vector<Vec3> obs;
    obs.reserve(refs.size());
    for (const Vec3& r : refs) {
        obs.push_back(A * r + sigma_meas * rng.gaussian3());
    }
    return obs;
}

Vec3 rate_profile(const ScenarioConfig& cfg, double t) {
    if (cfg.profile == RateProfile::Constant) {
        return cfg.rate_const;
    }
    Vec3 w;
    for (int i = 0; i < 3; ++i) {
        w(i) = cfg.rate_amp(i) *
               std::sin(2.0 * std::numbers::pi * cfg.rate_freq_hz(i) * t);
    }
    return w;
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
    if (!(cfg.gyro_dt > 0.0) || !(cfg.meas_dt > 0.0) || !(cfg.duration_s > 0.0)) {
        throw std::invalid_argument("generate_scenario: durations must be positive");
    }
    const double ratio = cfg.meas_dt / cfg.gyro_dt;
    const auto meas_every = static_cast<std::size_t>(std::llround(ratio));
    if (meas_every == 0 || std::abs(ratio - static_cast<double>(meas_every)) > 1e-9) {
        throw std::invalid_argument(
            "generate_scenario: meas_dt must be an integer multiple of gyro_dt");
    }
    const auto steps = static_cast<std::size_t>(std::llround(cfg.duration_s / cfg.gyro_dt));

    GaussianRng rng_bias(derive_stream_seed(cfg.seed, 1));
    GaussianRng rng_gyro(derive_stream_seed(cfg.seed, 2));
    GaussianRng rng_meas(derive_stream_seed(cfg.seed, 3));

    Scenario sc;
    sc.cfg = cfg;
    sc.truth.reserve(steps + 1);
    sc.gyro.reserve(steps);

    TruthState s;
    s.q_true = UnitQuaternion::identity();
    s.b_true = cfg.initial_bias;
    s.t = 0.0;
    sc.truth.push_back(s);

    for (std::size_t k = 0; k < steps; ++k) {
        const Vec3 w_true = rate_profile(cfg, s.t);
        sc.gyro.push_back(gyro_measure(w_true, s.b_true, cfg.gyro_dt, cfg.noise, rng_gyro));
        s = step_truth(s, w_true, cfg.gyro_dt, cfg.noise, rng_bias);
        sc.truth.push_back(s);
        if ((k + 1) % meas_every == 0) {
            MeasurementEpoch e;
            e.gyro_index = k;
            e.t = s.t;
            e.obs = vector_measure(s.q_true, cfg.refs, cfg.sigma_meas, rng_meas);
            sc.meas.push_back(std::move(e));
        }
    }
    return sc;
}

}  // namespace attfilt
