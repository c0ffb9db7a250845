#include "attfilt/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace attfilt {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class KeyValues {
  public:
    explicit KeyValues(std::istream& is) {
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) {
                line = line.substr(0, hash);
            }
            line = trim(line);
            if (line.empty()) {
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
            }
            kv_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    double number(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) {
            return fallback;
        }
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) {
                throw std::invalid_argument("trailing characters");
            }
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': bad number '" + it->second + "'");
        }
    }

    Vec3 vec3(const std::string& key, const Vec3& fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) {
            return fallback;
        }
        std::stringstream ss(it->second);
        Vec3 v;
        char comma = ',';
        ss >> v.x() >> comma >> v.y() >> comma >> v.z();
        if (ss.fail()) {
            throw ConfigError("config key '" + key + "': expected 'x, y, z'");
        }
        return v;
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    bool on_off(const std::string& key, bool fallback) const {
        const std::string v = text(key, fallback ? "on" : "off");
        if (v == "on" || v == "true" || v == "1") return true;
        if (v == "off" || v == "false" || v == "0") return false;
        throw ConfigError("config key '" + key + "': expected on|off");
    }

  private:
    std::map<std::string, std::string> kv_;
};

Vec3 squared(const Vec3& v) { return v.cwiseProduct(v); }

}  // namespace

BenchConfig default_config() {
    BenchConfig c;
    ScenarioConfig& s = c.scenario;
    s.duration_s = 3600.0;
    s.gyro_dt = 0.1;
    s.meas_dt = 1.0;
    s.profile = RateProfile::Sinusoidal;
    s.rate_amp = Vec3(360.0, 240.0, 300.0) * kDegPerHourToRadPerSec;
    s.rate_freq_hz = Vec3(0.0010, 0.0007, 0.0013);
    s.initial_bias = Vec3(0.1, 0.1, 0.1) * kDegPerHourToRadPerSec;
    s.noise.sigma_v = 1e-5;
    s.noise.sigma_u = 1e-8;
    s.sigma_meas = 0.001 * kDegToRad;  // ~17.5 urad, star-tracker class
    s.refs = {Vec3::UnitX(), Vec3::UnitY()};
    s.init_att_err = Vec3(0.05, -0.03, 0.04) * kDegToRad;
    s.init_bias_err = Vec3(0.05, -0.05, 0.05) * kDegPerHourToRadPerSec;
    const Vec3 p0_att = squared(Vec3::Constant(0.1 * kDegToRad));
    const Vec3 p0_bias = squared(Vec3::Constant(0.2 * kDegPerHourToRadPerSec));
    s.P0_diag << p0_att, p0_bias;
    s.seed = 1;

    c.tuning.noise = s.noise;
    c.tuning.sigma_meas = s.sigma_meas;
    c.tuning.P0_diag = s.P0_diag;
    return c;
}

BenchConfig parse_config(std::istream& is) {
    const KeyValues kv(is);
    BenchConfig c = default_config();
    ScenarioConfig& s = c.scenario;

    s.duration_s = kv.number("duration_s", s.duration_s);
    s.gyro_dt = kv.number("gyro_dt_s", s.gyro_dt);
    s.meas_dt = kv.number("meas_dt_s", s.meas_dt);

    const std::string profile = kv.text("rate_profile", "sinusoidal");
    if (profile == "constant") {
        s.profile = RateProfile::Constant;
    } else if (profile == "sinusoidal") {
        s.profile = RateProfile::Sinusoidal;
    } else {
        throw ConfigError("rate_profile: expected constant|sinusoidal");
    }
    s.rate_const =
        kv.vec3("rate_const_deg_h", s.rate_const / kDegPerHourToRadPerSec) *
        kDegPerHourToRadPerSec;
    s.rate_amp = kv.vec3("rate_amp_deg_h", s.rate_amp / kDegPerHourToRadPerSec) *
                 kDegPerHourToRadPerSec;
    s.rate_freq_hz = kv.vec3("rate_freq_hz", s.rate_freq_hz);

    s.initial_bias =
        kv.vec3("initial_bias_deg_h", s.initial_bias / kDegPerHourToRadPerSec) *
        kDegPerHourToRadPerSec;
    s.noise.sigma_v = kv.number("sigma_v", s.noise.sigma_v);
    s.noise.sigma_u = kv.number("sigma_u", s.noise.sigma_u);
    s.sigma_meas = kv.number("sigma_meas_deg", s.sigma_meas / kDegToRad) * kDegToRad;

    if (kv.has("ref_1")) {
        s.refs.clear();
        for (int i = 1; kv.has("ref_" + std::to_string(i)); ++i) {
            const Vec3 r = kv.vec3("ref_" + std::to_string(i), Vec3::Zero());
            if (r.norm() < 1e-12) {
                throw ConfigError("ref_" + std::to_string(i) + ": zero vector");
            }
            s.refs.push_back(r.normalized());
        }
    }

    s.init_att_err =
        kv.vec3("init_att_err_deg", s.init_att_err / kDegToRad) * kDegToRad;
    s.init_bias_err =
        kv.vec3("init_bias_err_deg_h", s.init_bias_err / kDegPerHourToRadPerSec) *
        kDegPerHourToRadPerSec;

    const Vec3 p0_att_std =
        kv.vec3("p0_att_std_deg", Vec3::Constant(0.1)) * kDegToRad;
    const Vec3 p0_bias_std =
        kv.vec3("p0_bias_std_deg_h", Vec3::Constant(0.2)) * kDegPerHourToRadPerSec;
    s.P0_diag << squared(p0_att_std), squared(p0_bias_std);

    const double seed = kv.number("seed", static_cast<double>(s.seed));
    if (seed < 0) {
        throw ConfigError("seed: must be non-negative");
    }
    s.seed = static_cast<std::uint64_t>(seed);

    FilterTuning& t = c.tuning;
    t.noise.sigma_v = kv.number("filter_sigma_v", s.noise.sigma_v);
    t.noise.sigma_u = kv.number("filter_sigma_u", s.noise.sigma_u);
    t.sigma_meas =
        kv.number("filter_sigma_meas_deg", s.sigma_meas / kDegToRad) * kDegToRad;
    t.P0_diag = s.P0_diag;
    t.reset_mode =
        kv.on_off("covariance_mod", true) ? ResetMode::Full : ResetMode::None;
    t.mekf_attitude_reset = kv.on_off("mekf_attitude_reset", false);

    if (t.sigma_meas <= 0.0) {
        throw ConfigError("filter measurement sigma must be positive");
    }
    return c;
}

BenchConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw ConfigError("cannot open config file: " + path);
    }
    return parse_config(f);
}

}  // namespace attfilt
