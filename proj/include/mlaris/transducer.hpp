#pragma once

// Electrical-equivalent model of a PZT reflector layer: full and simplified
// impedance evaluation plus the discretized parameter envelope that spans
// environmental (temperature) extremes.

#include <optional>
#include <vector>

#include "mlaris/core.hpp"

namespace mlaris {

// Series RLC mechanical branch reflected into the electrical port.
struct MechanicalBranch {
    double r_m = 0.0;        // ohms
    double l_m = 0.0;        // henries
    double c_m = 0.0;        // farads
    Complex z_rad{0.0, 0.0}; // radiation impedance, ohms
    double turns_ratio = 1.0;

    void validate() const {
        require(r_m > 0.0 && std::isfinite(r_m), "mechanical branch: r_m must be > 0");
        require(l_m > 0.0 && std::isfinite(l_m), "mechanical branch: l_m must be > 0");
        require(c_m > 0.0 && std::isfinite(c_m), "mechanical branch: c_m must be > 0");
        require(is_finite(z_rad), "mechanical branch: z_rad must be finite");
        require(std::isfinite(turns_ratio), "mechanical branch: turns_ratio must be finite");
    }
};

struct PztCircuitParams {
    double r_e = 0.0;       // dielectric loss resistance, ohms
    double c_e = 0.0;       // dielectric capacitance, farads
    double re_zs_eff = 0.0; // transformed mechanical resistance, ohms
    std::optional<MechanicalBranch> mech;

    void validate() const {
        require(r_e > 0.0 && std::isfinite(r_e), "params: r_e must be > 0");
        require(c_e > 0.0 && std::isfinite(c_e), "params: c_e must be > 0");
        require(re_zs_eff >= 0.0 && std::isfinite(re_zs_eff), "params: re_zs_eff must be >= 0");
        if (mech) mech->validate();
    }
};

struct SweepPoint {
    double freq_hz = 0.0;
    Complex z{0.0, 0.0};
};

struct ImpedanceSweep {
    std::vector<SweepPoint> entries;

    void validate(std::size_t min_points = 3) const {
        require(entries.size() >= min_points, "sweep: too few points");
        double prev = 0.0;
        for (const auto& p : entries) {
            require(p.freq_hz > prev, "sweep: frequencies must be strictly increasing and > 0");
            require(is_finite(p.z), "sweep: impedance values must be finite");
            prev = p.freq_hz;
        }
    }
};

// Mechanical branch impedance seen from the secondary side.
inline Complex secondary_impedance(const PztCircuitParams& params, double f_hz) {
    require(params.mech.has_value(), "secondary_impedance: mechanical branch required");
    require_domain(f_hz > 0.0 && std::isfinite(f_hz), "secondary_impedance: f must be > 0");
    params.validate();
    const auto& m = *params.mech;
    const double w = angular_frequency(f_hz);
    return Complex{m.r_m, w * m.l_m - 1.0 / (w * m.c_m)} + m.z_rad;
}

// Total electrical impedance: dielectric branch plus the transformed
// mechanical branch.
inline Complex full_impedance(const PztCircuitParams& params, double f_hz) {
    require(params.mech.has_value(), "full_impedance: mechanical branch required");
    require_domain(f_hz > 0.0 && std::isfinite(f_hz), "full_impedance: f must be > 0");
    params.validate();
    const double w = angular_frequency(f_hz);
    const double x = w * params.c_e * params.r_e;
    const double denom = 1.0 + x * x;
    const Complex dielectric{params.r_e / denom, -w * params.c_e * params.r_e * params.r_e / denom};
    const double phi = params.mech->turns_ratio;
    return dielectric + phi * phi * secondary_impedance(params, f_hz);
}

// High-Q simplification valid when w*C_E*R_E >> 1: the mechanical branch
// collapses to its effective resistance at resonance.
inline Complex simplified_impedance(const PztCircuitParams& params, double f_hz) {
    require_domain(f_hz > 0.0 && std::isfinite(f_hz), "simplified_impedance: f must be > 0");
    params.validate();
    const double w = angular_frequency(f_hz);
    const double wc = w * params.c_e;
    return Complex{1.0 / (params.r_e * wc * wc) + params.re_zs_eff, -1.0 / wc};
}

struct ImpedanceEnvelope {
    std::vector<PztCircuitParams> entries;

    std::size_t n_d() const { return entries.size(); }
};

// Linear discretization between the two environmental endpoints.  Entry 1 is
// the beta endpoint, entry n_d the alpha endpoint; R and C descend while the
// effective resistance ascends.  Endpoints are returned exactly.
inline ImpedanceEnvelope build_envelope(const PztCircuitParams& alpha,
                                        const PztCircuitParams& beta,
                                        std::size_t n_d) {
    alpha.validate();
    beta.validate();
    require(n_d >= 2, "build_envelope: n_d must be >= 2");
    require(alpha.r_e < beta.r_e, "build_envelope: expected r_e(alpha) < r_e(beta)");
    require(alpha.c_e < beta.c_e, "build_envelope: expected c_e(alpha) < c_e(beta)");
    require(alpha.re_zs_eff > beta.re_zs_eff,
            "build_envelope: expected re_zs_eff(alpha) > re_zs_eff(beta)");

    ImpedanceEnvelope env;
    env.entries.reserve(n_d);
    const double steps = static_cast<double>(n_d - 1);
    for (std::size_t i = 1; i <= n_d; ++i) {
        if (i == 1) {
            env.entries.push_back(beta);
            continue;
        }
        if (i == n_d) {
            env.entries.push_back(alpha);
            continue;
        }
        const double t = static_cast<double>(i - 1) / steps;
        PztCircuitParams p;
        p.r_e = beta.r_e - t * (beta.r_e - alpha.r_e);
        p.c_e = beta.c_e - t * (beta.c_e - alpha.c_e);
        p.re_zs_eff = beta.re_zs_eff - t * (beta.re_zs_eff - alpha.re_zs_eff);
        env.entries.push_back(p);
    }
    return env;
}

}  // namespace mlaris
