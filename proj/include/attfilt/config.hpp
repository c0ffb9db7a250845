#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "attfilt/bench.hpp"

// key = value config files for the CLI.  Angles are degrees, rates deg/h;
// everything is converted to SI on load.  Gyro noise densities sigma_v /
// sigma_u are given directly in rad/s^(1/2) and rad/s^(3/2).

namespace attfilt {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct BenchConfig {
    ScenarioConfig scenario;
    FilterTuning tuning;
};

/// The default desk-scale scenario: 60 min, 10 Hz gyro, 1 Hz vector
/// measurements, two orthogonal references, star-tracker-class noise.
BenchConfig default_config();

BenchConfig parse_config(std::istream& is);
BenchConfig load_config(const std::string& path);

constexpr double kDegToRad = 0.017453292519943295;
constexpr double kDegPerHourToRadPerSec = kDegToRad / 3600.0;

}  // namespace attfilt
