#pragma once

// Shared numeric helpers for the ML-ARIS library.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mlaris {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr const char* kVersion = "0.1.0";

inline double angular_frequency(double f_hz) { return 2.0 * kPi * f_hz; }

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wrap an angle to (-pi, pi].
inline double wrap_phase(double rad) {
    double w = std::remainder(rad, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

// Capacitance presenting a given reactance magnitude at frequency f.
inline double equivalent_capacitance(double f_hz, double reactance_ohms) {
    if (f_hz <= 0.0 || reactance_ohms == 0.0)
        throw std::domain_error("equivalent_capacitance: need f > 0 and nonzero reactance");
    return 1.0 / (2.0 * kPi * f_hz * std::abs(reactance_ohms));
}

inline bool is_finite(const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_domain(bool cond, const std::string& msg) {
    if (!cond) throw std::domain_error(msg);
}

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mlaris
