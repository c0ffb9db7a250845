#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "attfilt/filter_core.hpp"

// Truth-model and sensor simulator.  Everything is deterministic given the
// scenario seed; independent RNG streams are split per sensor so thread
// counts or call order cannot change a trajectory.

namespace attfilt {

struct TruthState {
    UnitQuaternion q_true;
    Vec3 b_true{Vec3::Zero()};  // rad/s
    double t{0.0};              // s
};

enum class RateProfile { Constant, Sinusoidal };

struct ScenarioConfig {
    double duration_s{3600.0};
    double gyro_dt{0.1};
    double meas_dt{1.0};

    RateProfile profile{RateProfile::Sinusoidal};
    Vec3 rate_const{Vec3::Zero()};              // rad/s, Constant profile
    Vec3 rate_amp{Vec3::Zero()};                // rad/s, Sinusoidal profile
    Vec3 rate_freq_hz{Vec3::Zero()};            // Hz, per axis

    Vec3 initial_bias{Vec3::Zero()};            // rad/s
    NoiseParams noise;                          // truth gyro noise
    double sigma_meas{0.0};                     // rad, per-axis vector noise
    std::vector<Vec3> refs;                     // unit reference vectors

    Vec3 init_att_err{Vec3::Zero()};            // rad, estimate offset
    Vec3 init_bias_err{Vec3::Zero()};           // rad/s, estimate offset
    Vec6 P0_diag{Vec6::Zero()};                 // initial covariance diagonal

    std::uint64_t seed{0};
};

/// Deterministic Gaussian stream: mt19937_64 + Box-Muller.  std::normal_
/// distribution is implementation-defined, so the transform is pinned here
/// to keep trajectories byte-stable across standard libraries.
class GaussianRng {
  public:
    explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

    double gaussian();
    Vec3 gaussian3();

  private:
    double uniform01();

    std::mt19937_64 engine_;
    bool has_spare_{false};
    double spare_{0.0};
};

/// Sub-seed derivation for per-sensor streams (splitmix64 of seed ^ tag).
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t tag);

struct MeasurementEpoch {
    std::size_t gyro_index;  // epoch occurs after this gyro sample is applied
    double t;
    std::vector<Vec3> obs;
};

struct Scenario {
    ScenarioConfig cfg;
    std::vector<TruthState> truth;       // size steps + 1
    std::vector<GyroSample> gyro;        // size steps
    std::vector<MeasurementEpoch> meas;
};

/// Advances the truth one step: exact rotation-vector attitude increment,
/// bias random walk b += sigma_u sqrt(dt) w.
TruthState step_truth(const TruthState& s, const Vec3& omega_true, double dt,
                      const NoiseParams& noise, GaussianRng& rng);

/// omega_meas = omega_true + b_true + sigma_v / sqrt(dt) * w.
GyroSample gyro_measure(const Vec3& omega_true, const Vec3& b_true, double dt,
                        const NoiseParams& noise, GaussianRng& rng);

/// y_i = A(q_true) r_i + sigma * w_i (not renormalized).
std::vector<Vec3> vector_measure(const UnitQuaternion& q_true,
                                 const std::vector<Vec3>& refs, double sigma_meas,
                                 GaussianRng& rng);

/// True angular rate at time t for the configured profile.
Vec3 rate_profile(const ScenarioConfig& cfg, double t);

/// Full deterministic scenario.  Rejects configs whose measurement interval
/// is not an integer multiple of the gyro interval.
Scenario generate_scenario(const ScenarioConfig& cfg);

}  // namespace attfilt
