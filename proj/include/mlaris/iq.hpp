#pragma once

// Two-layer IQ modulation: map a desired complex reflection target to a
// resistive in-phase layer plus a quantized reactive quadrature layer, and
// evaluate the realized per-layer / combined reflection coefficients.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "mlaris/core.hpp"

namespace mlaris {

enum class LoadKind { Open, Short, Resistive, Capacitive, Inductive };

struct LoadState {
    LoadKind kind = LoadKind::Open;
    double value = 0.0; // ohms for Resistive; stage amplitude for Capacitive/Inductive

    static LoadState open() { return {LoadKind::Open, 0.0}; }
    static LoadState short_circuit() { return {LoadKind::Short, 0.0}; }
    static LoadState resistive(double r) { return {LoadKind::Resistive, r}; }
    static LoadState capacitive(double a) { return {LoadKind::Capacitive, a}; }
    static LoadState inductive(double a) { return {LoadKind::Inductive, a}; }

    void validate() const {
        switch (kind) {
            case LoadKind::Resistive:
                require(value >= 0.0 && std::isfinite(value), "load: resistance must be >= 0");
                break;
            case LoadKind::Capacitive:
            case LoadKind::Inductive:
                require(value > 0.0 && value <= 1.0, "load: stage amplitude must be in (0,1]");
                break;
            default:
                break;
        }
    }

    bool operator==(const LoadState& o) const { return kind == o.kind && value == o.value; }
};

struct StageSet {
    std::vector<double> amplitudes{0.3, 0.6, 0.9};

    void validate() const {
        require(!amplitudes.empty(), "stages: at least one amplitude");
        double prev = 0.0;
        for (double a : amplitudes) {
            require(a > prev && a <= 1.0, "stages: amplitudes must be strictly ascending in (0,1]");
            prev = a;
        }
    }
};

struct ReflectionTarget {
    double a_r = 0.0;   // in [0, 1]
    double phi_r = 0.0; // radians, in [-pi, pi]

    void validate() const {
        require(a_r >= 0.0 && a_r <= 1.0, "target: a_r must be in [0,1]");
        require(phi_r >= -kPi && phi_r <= kPi, "target: phi_r must be in [-pi,pi]");
    }
};

struct LayerAssignment {
    LoadState layer1; // in-phase layer
    LoadState layer2; // quadrature layer
};

inline Complex gamma_of_load(const LoadState& load, double z0) {
    require(z0 > 0.0 && std::isfinite(z0), "gamma_of_load: z0 must be > 0");
    load.validate();
    switch (load.kind) {
        case LoadKind::Open:
            return {1.0, 0.0};
        case LoadKind::Short:
            return {-1.0, 0.0};
        case LoadKind::Resistive:
            return {(load.value - z0) / (load.value + z0), 0.0};
        case LoadKind::Capacitive:
            return {0.0, -load.value};
        case LoadKind::Inductive:
            return {0.0, load.value};
    }
    throw std::logic_error("gamma_of_load: unreachable");
}

// Potentiometer setting that realizes the in-phase component a_r*cos(phi_r).
// The exact extremes +-1 have no finite resistance; callers map them to
// Open/Short instead.
inline double rl_for_inphase(const ReflectionTarget& target, double z0) {
    target.validate();
    require(z0 > 0.0 && std::isfinite(z0), "rl_for_inphase: z0 must be > 0");
    const double ip = target.a_r * std::cos(target.phi_r);
    if (ip >= 1.0) throw std::domain_error("rl_for_inphase: in-phase component 1, use Open");
    if (ip <= -1.0) throw std::domain_error("rl_for_inphase: in-phase component -1, use Short");
    return z0 * (1.0 + ip) / (1.0 - ip);
}

inline LayerAssignment assign_loads(const ReflectionTarget& target, const StageSet& stages,
                                    double z0) {
    target.validate();
    stages.validate();
    require(z0 > 0.0 && std::isfinite(z0), "assign_loads: z0 must be > 0");

    LayerAssignment out;
    const double ip = target.a_r * std::cos(target.phi_r);
    constexpr double eps = 1e-12;
    if (ip >= 1.0 - eps) {
        out.layer1 = LoadState::open();
    } else if (ip <= -1.0 + eps) {
        out.layer1 = LoadState::short_circuit();
    } else {
        out.layer1 = LoadState::resistive(rl_for_inphase(target, z0));
    }

    const double q = target.a_r * std::sin(target.phi_r);
    const double aq = std::abs(q);
    // quantize |q| over {0} + stages; ties break toward the smaller amplitude
    double best_amp = 0.0;
    double best_dist = aq;
    for (double a : stages.amplitudes) {
        const double d = std::abs(aq - a);
        if (d < best_dist) {
            best_dist = d;
            best_amp = a;
        }
    }
    if (best_amp == 0.0) {
        out.layer2 = LoadState::resistive(z0); // null quadrature contribution
    } else if (std::sin(target.phi_r) >= 0.0) {
        out.layer2 = LoadState::inductive(best_amp);
    } else {
        out.layer2 = LoadState::capacitive(best_amp);
    }
    return out;
}

// Sum of the two layer coefficients; the physical superposition before
// open-reference normalization.
inline Complex combined_gamma_sum(const LayerAssignment& assignment, double z0) {
    return gamma_of_load(assignment.layer1, z0) + gamma_of_load(assignment.layer2, z0);
}

// Open-normalized effective coefficient (Gamma1 + Gamma2) / 2.
inline Complex combined_gamma(const LayerAssignment& assignment, double z0) {
    return combined_gamma_sum(assignment, z0) / 2.0;
}

// Verify the in-phase/quadrature decomposition identity
//   a cos(wt + phi_in + phi_r) = a cos(phi_r) cos(wt + phi_in)
//                              - a sin(phi_r) sin(wt + phi_in)
// pointwise on a time grid; returns the maximum absolute deviation.
inline double iq_recombination_check(const ReflectionTarget& target,
                                     const std::vector<double>& t_grid, double omega,
                                     double phi_in) {
    target.validate();
    require(!t_grid.empty(), "iq_recombination_check: time grid must be nonempty");
    double max_dev = 0.0;
    for (double t : t_grid) {
        const double carrier = omega * t + phi_in;
        const double lhs = target.a_r * std::cos(carrier + target.phi_r);
        const double rhs = target.a_r * std::cos(target.phi_r) * std::cos(carrier) -
                           target.a_r * std::sin(target.phi_r) * std::sin(carrier);
        max_dev = std::max(max_dev, std::abs(lhs - rhs));
    }
    return max_dev;
}

// Short token serialization: Op, Sh, R<ohms>, C<amp x 10>, L<amp x 10>.
inline std::string to_token(const LoadState& load) {
    load.validate();
    char buf[32];
    switch (load.kind) {
        case LoadKind::Open:
            return "Op";
        case LoadKind::Short:
            return "Sh";
        case LoadKind::Resistive:
            std::snprintf(buf, sizeof buf, "R%g", load.value);
            return buf;
        case LoadKind::Capacitive:
            std::snprintf(buf, sizeof buf, "C%02d",
                          static_cast<int>(std::lround(load.value * 10.0)));
            return buf;
        case LoadKind::Inductive:
            std::snprintf(buf, sizeof buf, "L%02d",
                          static_cast<int>(std::lround(load.value * 10.0)));
            return buf;
    }
    throw std::logic_error("to_token: unreachable");
}

inline LoadState parse_load_token(const std::string& token) {
    if (token == "Op") return LoadState::open();
    if (token == "Sh") return LoadState::short_circuit();
    require(token.size() >= 2, "load token too short: '" + token + "'");
    const char kind = token[0];
    std::size_t pos = 0;
    double num = 0.0;
    try {
        num = std::stod(token.substr(1), &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad load token: '" + token + "'");
    }
    require(pos == token.size() - 1, "trailing characters in load token: '" + token + "'");
    switch (kind) {
        case 'R':
            return LoadState::resistive(num);
        case 'C':
            return LoadState::capacitive(num / 10.0);
        case 'L':
            return LoadState::inductive(num / 10.0);
        default:
            throw std::invalid_argument("unknown load token kind: '" + token + "'");
    }
}

}  // namespace mlaris
