#pragma once

// Idealized reflected-field model for an ML-ARIS array: isotropic point
// reflectors excited by a plane wave, re-radiating spherical waves weighted
// by their programmed reflection coefficients.  Supports continuous, IQ,
// 1-bit and 2-bit coding, near/far-field probe rings and lobe metrics.
//
// Angle convention (also documented in output headers): 0 degrees along the
// array axis (+x), 90 degrees broadside (+y), counterclockwise positive.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mlaris/core.hpp"
#include "mlaris/iq.hpp"

namespace mlaris {

using Point2 = std::array<double, 2>;

inline double dot(const Point2& a, const Point2& b) { return a[0] * b[0] + a[1] * b[1]; }

struct IncidentWave {
    double frequency = 28000.0;   // Hz
    double sound_speed = 1500.0;  // m/s
    Point2 direction{0.0, -1.0};  // unit propagation direction
    double amplitude = 1.0;       // Pa

    void validate() const {
        require(frequency > 0.0 && std::isfinite(frequency), "wave: frequency must be > 0");
        require(sound_speed > 0.0 && std::isfinite(sound_speed), "wave: sound_speed must be > 0");
        const double n = std::hypot(direction[0], direction[1]);
        require(std::abs(n - 1.0) < 1e-9, "wave: direction must be a unit vector");
    }

    double wavelength() const { return sound_speed / frequency; }
    double wavenumber() const { return 2.0 * kPi / wavelength(); }
};

struct ArrayConfig {
    std::vector<Point2> element_positions;

    void validate() const {
        require(!element_positions.empty(), "array: at least one element");
        for (std::size_t i = 0; i < element_positions.size(); ++i)
            for (std::size_t j = i + 1; j < element_positions.size(); ++j)
                require(element_positions[i] != element_positions[j],
                        "array: element positions must be distinct");
    }

    // n elements on the x axis, centred on the origin.
    static ArrayConfig uniform_linear(std::size_t n, double spacing) {
        require(n >= 1 && spacing > 0.0, "array: need n >= 1 and spacing > 0");
        ArrayConfig cfg;
        const double x0 = -0.5 * spacing * static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i)
            cfg.element_positions.push_back({x0 + spacing * static_cast<double>(i), 0.0});
        return cfg;
    }

    double aperture() const {
        double d = 0.0;
        for (std::size_t i = 0; i < element_positions.size(); ++i)
            for (std::size_t j = i + 1; j < element_positions.size(); ++j)
                d = std::max(d, std::hypot(element_positions[i][0] - element_positions[j][0],
                                           element_positions[i][1] - element_positions[j][1]));
        return d;
    }
};

struct ProbeRing {
    Point2 center{0.0, 0.0};
    double radius = 0.75;
    std::size_t count = 72;

    void validate() const {
        require(radius > 0.0 && std::isfinite(radius), "ring: radius must be > 0");
        require(count >= 3, "ring: at least 3 probes");
    }
};

struct BeamSample {
    double angle_deg = 0.0;
    Complex pressure{0.0, 0.0};
    double magnitude = 0.0;
    double normalized = 0.0;
};

struct BeamPattern {
    std::vector<BeamSample> samples; // ascending angle
    double max_magnitude = 0.0;
    bool zero_pattern = false;
};

struct CodingScheme {
    enum class Kind { Continuous, IQ, OneBit, TwoBit };
    Kind kind = Kind::Continuous;
    StageSet stages; // used by IQ

    static const char* name(Kind k) {
        switch (k) {
            case Kind::Continuous: return "continuous";
            case Kind::IQ: return "iq";
            case Kind::OneBit: return "1bit";
            case Kind::TwoBit: return "2bit";
        }
        return "?";
    }
};

// Per-element phase targets that co-phase the far-field contributions toward
// the steer direction (unit amplitude everywhere).
inline std::vector<ReflectionTarget> desired_profile(const ArrayConfig& array,
                                                     const IncidentWave& wave,
                                                     double steer_deg) {
    array.validate();
    wave.validate();
    const double k = wave.wavenumber();
    const double th = deg_to_rad(steer_deg);
    const Point2 u_steer{std::cos(th), std::sin(th)};
    std::vector<ReflectionTarget> out;
    out.reserve(array.element_positions.size());
    for (const auto& p : array.element_positions) {
        const double phase = k * dot(wave.direction, p) - k * dot(u_steer, p);
        out.push_back({1.0, wrap_phase(phase)});
    }
    return out;
}

struct QuantizedElement {
    Complex coeff{0.0, 0.0};
    LoadState layer1;
    std::optional<LoadState> layer2; // present only under IQ coding
};

inline QuantizedElement quantize_one(const ReflectionTarget& target, const CodingScheme& scheme,
                                     double z0) {
    QuantizedElement out;
    switch (scheme.kind) {
        case CodingScheme::Kind::Continuous: {
            out.coeff = std::polar(1.0, target.phi_r);
            out.layer1 = LoadState::open(); // placeholder; continuous has no discrete load
            break;
        }
        case CodingScheme::Kind::IQ: {
            const LayerAssignment a = assign_loads(target, scheme.stages, z0);
            out.coeff = combined_gamma(a, z0);
            out.layer1 = a.layer1;
            out.layer2 = a.layer2;
            break;
        }
        case CodingScheme::Kind::OneBit: {
            // nearest of {+1, -1}; tie toward +1
            const bool pos = std::cos(target.phi_r) >= 0.0;
            out.layer1 = pos ? LoadState::open() : LoadState::short_circuit();
            out.coeff = gamma_of_load(out.layer1, z0);
            break;
        }
        case CodingScheme::Kind::TwoBit: {
            // nearest of {+1, -1, +j, -j}; ties toward the real axis, then +
            const double c = std::cos(target.phi_r);
            const double s = std::sin(target.phi_r);
            if (std::abs(c) >= std::abs(s))
                out.layer1 = c >= 0.0 ? LoadState::open() : LoadState::short_circuit();
            else
                out.layer1 = s > 0.0 ? LoadState::inductive(1.0) : LoadState::capacitive(1.0);
            out.coeff = gamma_of_load(out.layer1, z0);
            break;
        }
    }
    return out;
}

inline std::vector<QuantizedElement> quantize_profile(const std::vector<ReflectionTarget>& targets,
                                                      const CodingScheme& scheme, double z0) {
    if (scheme.kind == CodingScheme::Kind::IQ) scheme.stages.validate();
    std::vector<QuantizedElement> out;
    out.reserve(targets.size());
    for (const auto& t : targets) out.push_back(quantize_one(t, scheme, z0));
    return out;
}

// Reflected field only: each element re-radiates a spherical wave carrying
// the incident plane-wave phase at its position.  Compensated (Kahan)
// summation keeps the result independent of element ordering to ~1e-16.
inline Complex field_at_point(const ArrayConfig& array, const std::vector<Complex>& coefficients,
                              const IncidentWave& wave, const Point2& point) {
    array.validate();
    wave.validate();
    require(coefficients.size() == array.element_positions.size(),
            "field_at_point: one coefficient per element required");
    const double k = wave.wavenumber();
    double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0; // sums and compensations
    for (std::size_t n = 0; n < coefficients.size(); ++n) {
        const auto& p = array.element_positions[n];
        const double r = std::hypot(point[0] - p[0], point[1] - p[1]);
        if (r < 1e-3)
            throw std::domain_error("field_at_point: probe within 1 mm of an element");
        const double phase = -k * dot(wave.direction, p) - k * r;
        const Complex term =
            coefficients[n] * wave.amplitude * std::polar(1.0 / r, phase);
        double y = term.real() - cr;
        double t = sr + y;
        cr = (t - sr) - y;
        sr = t;
        y = term.imag() - ci;
        t = si + y;
        ci = (t - si) - y;
        si = t;
    }
    return {sr, si};
}

inline std::vector<Complex> coefficients_of(const std::vector<QuantizedElement>& q) {
    std::vector<Complex> c;
    c.reserve(q.size());
    for (const auto& e : q) c.push_back(e.coeff);
    return c;
}

inline BeamPattern beam_pattern(const ArrayConfig& array, const std::vector<Complex>& coefficients,
                                const IncidentWave& wave, const ProbeRing& ring) {
    ring.validate();
    BeamPattern out;
    out.samples.reserve(ring.count);
    for (std::size_t i = 0; i < ring.count; ++i) {
        const double ang = 360.0 * static_cast<double>(i) / static_cast<double>(ring.count);
        const double th = deg_to_rad(ang);
        const Point2 pt{ring.center[0] + ring.radius * std::cos(th),
                        ring.center[1] + ring.radius * std::sin(th)};
        const Complex f = field_at_point(array, coefficients, wave, pt);
        out.samples.push_back({ang, f, std::abs(f), 0.0});
        out.max_magnitude = std::max(out.max_magnitude, std::abs(f));
    }
    if (out.max_magnitude == 0.0) {
        out.zero_pattern = true;
    } else {
        for (auto& s : out.samples) s.normalized = s.magnitude / out.max_magnitude;
    }
    return out;
}

struct Lobe {
    double angle_deg = 0.0;
    double normalized = 0.0;
};

struct BeamMetrics {
    Lobe main;
    double main_magnitude = 0.0; // absolute, Pa
    std::vector<Lobe> side_lobes;    // normalized < 0.8, nearest to main first
    std::vector<Lobe> grating_lobes; // normalized >= 0.8
    std::optional<Lobe> first_side_lobe;
};

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double circular_distance_deg(double a, double b) {
    double d = std::abs(std::remainder(a - b, 360.0));
    return d;
}

}  // namespace detail

// Lobe analysis on a circular pattern.  `main_sector`, when given, restricts
// the main-lobe search to [first, second] degrees; secondary-lobe
// classification always uses the full circle.
inline BeamMetrics beam_metrics(const BeamPattern& pattern,
                                std::optional<std::pair<double, double>> main_sector = {}) {
    if (pattern.zero_pattern || pattern.samples.empty())
        throw MetricError("beam_metrics: zero or empty pattern");
    const std::size_t n = pattern.samples.size();

    // circular local maxima, plateaus collapsed to their first index
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < n; ++i) {
        const double m = pattern.samples[i].magnitude;
        const double prev = pattern.samples[(i + n - 1) % n].magnitude;
        const double next = pattern.samples[(i + 1) % n].magnitude;
        if (m >= prev && m >= next && (m > prev || m > next)) {
            if (m == prev) continue; // keep only the first sample of a plateau
            peaks.push_back(i);
        }
    }
    if (peaks.empty())
        throw MetricError("beam_metrics: pattern has no local maxima (constant?)");

    const auto in_sector = [&](double ang) {
        if (!main_sector) return true;
        return ang >= main_sector->first && ang <= main_sector->second;
    };
    std::size_t main_idx = peaks.front();
    bool found = false;
    for (std::size_t i : peaks) {
        if (!in_sector(pattern.samples[i].angle_deg)) continue;
        if (!found || pattern.samples[i].magnitude > pattern.samples[main_idx].magnitude) {
            main_idx = i;
            found = true;
        }
    }
    if (!found) throw MetricError("beam_metrics: no local maximum inside the main sector");

    BeamMetrics out;
    out.main = {pattern.samples[main_idx].angle_deg, pattern.samples[main_idx].normalized};
    out.main_magnitude = pattern.samples[main_idx].magnitude;

    std::vector<Lobe> secondary;
    for (std::size_t i : peaks) {
        if (i == main_idx) continue;
        secondary.push_back({pattern.samples[i].angle_deg, pattern.samples[i].normalized});
    }
    std::sort(secondary.begin(), secondary.end(), [&](const Lobe& a, const Lobe& b) {
        return detail::circular_distance_deg(a.angle_deg, out.main.angle_deg) <
               detail::circular_distance_deg(b.angle_deg, out.main.angle_deg);
    });
    for (const auto& l : secondary) {
        if (l.normalized >= 0.8)
            out.grating_lobes.push_back(l);
        else
            out.side_lobes.push_back(l);
    }
    if (!out.side_lobes.empty()) out.first_side_lobe = out.side_lobes.front();
    return out;
}

struct BeamScenario {
    IncidentWave wave;
    ArrayConfig array;
    double steer_deg = 45.0;
    ProbeRing ring;
    double z0 = 1000.0;
    StageSet stages;
};

struct SchemeResult {
    CodingScheme::Kind kind = CodingScheme::Kind::Continuous;
    BeamPattern pattern;
    BeamMetrics metrics;
    std::vector<QuantizedElement> elements;
};

inline SchemeResult run_scheme(const BeamScenario& sc, CodingScheme::Kind kind,
                               std::optional<std::pair<double, double>> main_sector = {}) {
    CodingScheme scheme;
    scheme.kind = kind;
    scheme.stages = sc.stages;
    const auto targets = desired_profile(sc.array, sc.wave, sc.steer_deg);
    SchemeResult out;
    out.kind = kind;
    out.elements = quantize_profile(targets, scheme, sc.z0);
    out.pattern = beam_pattern(sc.array, coefficients_of(out.elements), sc.wave, sc.ring);
    out.metrics = beam_metrics(out.pattern, main_sector);
    return out;
}

// Identical geometry and steering across all four coding schemes.
inline std::vector<SchemeResult> compare_schemes(
    const BeamScenario& sc, std::optional<std::pair<double, double>> main_sector = {}) {
    std::vector<SchemeResult> out;
    for (auto k : {CodingScheme::Kind::IQ, CodingScheme::Kind::OneBit,
                   CodingScheme::Kind::TwoBit, CodingScheme::Kind::Continuous})
        out.push_back(run_scheme(sc, k, main_sector));
    return out;
}

}  // namespace mlaris
