#pragma once

// Multipath synthesis under the single-reflection signal model and the
// reference-subtraction pipeline that recovers the reflected wave's complex
// coefficient: ambient removal via the open/short references, open-reference
// normalization, least-squares ratio over a steady-state window.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "mlaris/core.hpp"
#include "mlaris/iq.hpp"

namespace mlaris {

struct SourceBurst {
    double carrier_freq = 25000.0; // Hz
    double cycles = 2500.0;
    double initial_phase = 0.0; // radians
    double sample_rate = 400000.0;
    double amplitude = 1.0;

    void validate() const {
        require(carrier_freq > 0.0 && std::isfinite(carrier_freq), "burst: carrier must be > 0");
        require(cycles >= 1.0, "burst: at least one cycle");
        require(sample_rate >= 8.0 * carrier_freq, "burst: sample_rate must be >= 8x carrier");
        require(std::isfinite(amplitude), "burst: amplitude must be finite");
    }

    double duration() const { return cycles / carrier_freq; }

    // analytic value at time t (zero outside the burst)
    Complex at(double t) const {
        if (t < 0.0 || t >= duration()) return {0.0, 0.0};
        return amplitude * std::polar(1.0, angular_frequency(carrier_freq) * t + initial_phase);
    }
};

struct AmbientTap {
    double amplitude = 0.0;
    double phase = 0.0; // radians
    double delay = 0.0; // seconds
};

struct MultipathChannel {
    std::vector<AmbientTap> ambient_taps;  // index 0 = direct path
    std::vector<double> reflector_delays;  // one per reflector path, seconds

    void validate() const {
        require(!ambient_taps.empty(), "channel: the direct tap is required");
        require(!reflector_delays.empty(), "channel: at least one reflector path");
        for (const auto& t : ambient_taps)
            require(t.delay >= 0.0 && std::isfinite(t.delay), "channel: tap delays must be >= 0");
        for (double d : reflector_delays)
            require(d >= 0.0 && std::isfinite(d), "channel: reflector delays must be >= 0");
    }

    double max_delay() const {
        double m = 0.0;
        for (const auto& t : ambient_taps) m = std::max(m, t.delay);
        for (double d : reflector_delays) m = std::max(m, d);
        return m;
    }
};

struct ReflectorScene {
    std::vector<Complex> layer_gammas;

    void validate() const {
        require(!layer_gammas.empty(), "scene: at least one layer");
        for (const auto& g : layer_gammas)
            require(std::abs(g) <= 1.0 + 1e-12, "scene: |gamma| must be <= 1 per layer");
    }

    Complex gamma_sum() const {
        Complex s{0.0, 0.0};
        for (const auto& g : layer_gammas) s += g;
        return s;
    }
};

struct Waveform {
    double sample_rate = 0.0;
    std::vector<Complex> samples;

    void validate() const {
        require(sample_rate > 0.0 && std::isfinite(sample_rate), "waveform: bad sample rate");
        for (const auto& s : samples) require(is_finite(s), "waveform: non-finite sample");
    }

    double duration() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

struct ExtractionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Received waveform: ambient taps plus the single-bounce reflector paths,
// each reflector path carrying the summed layer coefficients.
// `duration_s` <= 0 selects an automatic duration covering every arrival.
inline Waveform synthesize_received(const MultipathChannel& channel, const ReflectorScene& scene,
                                    const SourceBurst& burst, double duration_s = 0.0) {
    channel.validate();
    scene.validate();
    burst.validate();
    if (duration_s <= 0.0) duration_s = channel.max_delay() + burst.duration();
    require_domain(channel.max_delay() < duration_s,
                   "synthesize_received: a path delay exceeds the synthesis duration");
    const Complex gsum = scene.gamma_sum();
    Waveform out;
    out.sample_rate = burst.sample_rate;
    const std::size_t n = static_cast<std::size_t>(std::ceil(duration_s * burst.sample_rate));
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / burst.sample_rate;
        Complex v{0.0, 0.0};
        for (const auto& tap : channel.ambient_taps)
            v += tap.amplitude * std::polar(1.0, tap.phase) * burst.at(t - tap.delay);
        for (double d : channel.reflector_delays) v += gsum * burst.at(t - d);
        out.samples[i] = v;
    }
    return out;
}

namespace detail {

inline void require_aligned(const Waveform& a, const Waveform& b, const char* who) {
    require(a.sample_rate == b.sample_rate && a.samples.size() == b.samples.size(),
            std::string(who) + ": waveforms must share sample rate and length");
}

}  // namespace detail

// Ambient estimate (r_opop + r_shsh)/2: the reflector contributions cancel
// because the open and short coefficients are exactly opposite.
inline Waveform ambient_component(const Waveform& r_opop, const Waveform& r_shsh) {
    detail::require_aligned(r_opop, r_shsh, "ambient_component");
    Waveform out;
    out.sample_rate = r_opop.sample_rate;
    out.samples.resize(r_opop.samples.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = (r_opop.samples[i] + r_shsh.samples[i]) / 2.0;
    return out;
}

// Reflected component of the load recording: r_load minus the ambient estimate.
inline Waveform extract_reflection(const Waveform& r_load, const Waveform& r_opop,
                                   const Waveform& r_shsh) {
    detail::require_aligned(r_load, r_opop, "extract_reflection");
    detail::require_aligned(r_load, r_shsh, "extract_reflection");
    Waveform out;
    out.sample_rate = r_load.sample_rate;
    out.samples.resize(r_load.samples.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] =
            r_load.samples[i] - (r_opop.samples[i] + r_shsh.samples[i]) / 2.0;
    return out;
}

// Open-circuit reference (r_opop - r_shsh)/2 = sum of delayed bursts.
inline Waveform open_reference(const Waveform& r_opop, const Waveform& r_shsh) {
    detail::require_aligned(r_opop, r_shsh, "open_reference");
    Waveform out;
    out.sample_rate = r_opop.sample_rate;
    out.samples.resize(r_opop.samples.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = (r_opop.samples[i] - r_shsh.samples[i]) / 2.0;
    return out;
}

struct ExtractionResult {
    Waveform b_wave;
    Complex normalized_coeff{0.0, 0.0};
    double phase_deg = 0.0;
    double amplitude = 0.0;
    std::pair<double, double> window{0.0, 0.0}; // seconds
};

// Least-squares complex ratio of b to b_open over the window.
inline ExtractionResult normalized_coefficient(const Waveform& b, const Waveform& b_open,
                                               std::pair<double, double> window) {
    detail::require_aligned(b, b_open, "normalized_coefficient");
    b.validate();
    require(window.first < window.second, "normalized_coefficient: empty window");
    require(window.first >= 0.0 && window.second <= b.duration() + 0.5 / b.sample_rate,
            "normalized_coefficient: window outside the waveform extent");
    const std::size_t i0 = static_cast<std::size_t>(std::ceil(window.first * b.sample_rate));
    const std::size_t i1 = std::min<std::size_t>(
        b.samples.size(), static_cast<std::size_t>(std::floor(window.second * b.sample_rate)));
    require(i1 > i0, "normalized_coefficient: window contains no samples");

    Complex num{0.0, 0.0};
    double den = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
        num += b.samples[i] * std::conj(b_open.samples[i]);
        den += std::norm(b_open.samples[i]);
    }
    if (den / static_cast<double>(i1 - i0) < 1e-24)
        throw ExtractionError("normalized_coefficient: degenerate open reference in window");

    ExtractionResult out;
    out.b_wave = b;
    out.normalized_coeff = num / den;
    out.phase_deg = rad_to_deg(std::arg(out.normalized_coeff));
    out.amplitude = std::abs(out.normalized_coeff);
    out.window = window;
    return out;
}

// Default analysis window: the central 50% of the span where every arrival
// of the burst overlaps.
inline std::pair<double, double> steady_state_window(const MultipathChannel& channel,
                                                     const SourceBurst& burst) {
    channel.validate();
    burst.validate();
    const double t0 = channel.max_delay();
    double first_end = burst.duration();
    for (const auto& t : channel.ambient_taps)
        first_end = std::min(first_end, t.delay + burst.duration());
    for (double d : channel.reflector_delays)
        first_end = std::min(first_end, d + burst.duration());
    require(first_end > t0, "steady_state_window: arrivals never overlap");
    const double span = first_end - t0;
    return {t0 + 0.25 * span, t0 + 0.75 * span};
}

// Shared with iq_modulation; exposed here for report symmetry.
inline Complex theoretical_coefficient(const LayerAssignment& assignment, double z0) {
    return combined_gamma(assignment, z0);
}

struct DeviationRow {
    double phase_dev_deg = 0.0; // measured - theory, wrapped
    double amp_dev = 0.0;       // measured - theory
};

struct DeviationTable {
    std::vector<DeviationRow> rows;
    double mean_abs_phase_dev = 0.0;
    double max_abs_phase_dev = 0.0;
    double mean_abs_amp_dev = 0.0;
    double max_abs_amp_dev = 0.0;
};

inline DeviationTable experiment_report(const std::vector<ExtractionResult>& measured,
                                        const std::vector<Complex>& theoretical) {
    require(measured.size() == theoretical.size(), "experiment_report: length mismatch");
    DeviationTable out;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        DeviationRow row;
        const double dphi = deg_to_rad(measured[i].phase_deg) - std::arg(theoretical[i]);
        row.phase_dev_deg = rad_to_deg(wrap_phase(dphi));
        row.amp_dev = measured[i].amplitude - std::abs(theoretical[i]);
        out.rows.push_back(row);
        out.mean_abs_phase_dev += std::abs(row.phase_dev_deg);
        out.max_abs_phase_dev = std::max(out.max_abs_phase_dev, std::abs(row.phase_dev_deg));
        out.mean_abs_amp_dev += std::abs(row.amp_dev);
        out.max_abs_amp_dev = std::max(out.max_abs_amp_dev, std::abs(row.amp_dev));
    }
    if (!out.rows.empty()) {
        out.mean_abs_phase_dev /= static_cast<double>(out.rows.size());
        out.mean_abs_amp_dev /= static_cast<double>(out.rows.size());
    }
    return out;
}

// Quadrature demodulation of a real recording back to its analytic form:
// mix down by the carrier, average over one carrier period to reject the
// double-frequency image, mix back up.
inline Waveform analytic_from_real(const Waveform& real_wave, double carrier_freq) {
    real_wave.validate();
    require(carrier_freq > 0.0, "analytic_from_real: carrier must be > 0");
    const double w = angular_frequency(carrier_freq);
    const std::size_t n = real_wave.samples.size();
    std::vector<Complex> base(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / real_wave.sample_rate;
        base[i] = 2.0 * real_wave.samples[i].real() * std::polar(1.0, -w * t);
    }
    const std::size_t win = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(real_wave.sample_rate / carrier_freq)));
    Waveform out;
    out.sample_rate = real_wave.sample_rate;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Complex acc{0.0, 0.0};
        std::size_t cnt = 0;
        const std::size_t lo = i >= win / 2 ? i - win / 2 : 0;
        const std::size_t hi = std::min(n, lo + win);
        for (std::size_t j = lo; j < hi; ++j, ++cnt) acc += base[j];
        const double t = static_cast<double>(i) / real_wave.sample_rate;
        out.samples[i] = acc / static_cast<double>(cnt) * std::polar(1.0, w * t);
    }
    return out;
}

}  // namespace mlaris
