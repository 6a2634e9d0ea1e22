#pragma once

// File formats: impedance sweep CSV, parameter and network key-value
// documents, match report / beam / metrics CSV, waveform columns, scenario
// configs, and the run manifest.  All text is UTF-8 with '.' decimals;
// '#' starts a comment line.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mlaris/array_sim.hpp"
#include "mlaris/core.hpp"
#include "mlaris/matching.hpp"
#include "mlaris/signal_extraction.hpp"
#include "mlaris/transducer.hpp"

namespace mlaris {

struct ParseError : std::runtime_error {
    std::size_t line = 0;
    ParseError(const std::string& path, std::size_t line_no, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what),
          line(line_no) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& path, std::size_t line_no, const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(detail::trim(s), &pos);
    } catch (const std::exception&) {
        throw ParseError(path, line_no, "expected a number, got '" + s + "'");
    }
    if (pos != detail::trim(s).size())
        throw ParseError(path, line_no, "trailing characters after number in '" + s + "'");
    return v;
}

}  // namespace detail

// ---- impedance sweeps ------------------------------------------------------

inline ImpedanceSweep read_sweep_csv(std::istream& in, const std::string& path = "<stream>") {
    ImpedanceSweep sweep;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!header_seen) {
            if (t != "freq_hz,re_ohm,im_ohm")
                throw ParseError(path, line_no,
                                 "expected header 'freq_hz,re_ohm,im_ohm', got '" + t + "'");
            header_seen = true;
            continue;
        }
        const auto cols = detail::split(t, ',');
        if (cols.size() != 3)
            throw ParseError(path, line_no, "expected 3 columns, got " +
                                                std::to_string(cols.size()));
        SweepPoint p;
        p.freq_hz = detail::parse_double(path, line_no, cols[0]);
        p.z = {detail::parse_double(path, line_no, cols[1]),
               detail::parse_double(path, line_no, cols[2])};
        sweep.entries.push_back(p);
    }
    if (!header_seen) throw ParseError(path, line_no, "missing header line");
    try {
        sweep.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(path, line_no, e.what());
    }
    return sweep;
}

inline ImpedanceSweep read_sweep_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    return read_sweep_csv(in, path);
}

inline void write_sweep_csv(std::ostream& out, const ImpedanceSweep& sweep) {
    out << "freq_hz,re_ohm,im_ohm\n";
    out.precision(17);
    for (const auto& p : sweep.entries)
        out << p.freq_hz << ',' << p.z.real() << ',' << p.z.imag() << '\n';
}

// ---- generic key-value documents ------------------------------------------

using KeyValues = std::map<std::string, std::string>;

inline KeyValues read_key_values(std::istream& in, const std::string& path = "<stream>") {
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(path, line_no, "expected key=value, got '" + t + "'");
        const std::string key = detail::trim(t.substr(0, eq));
        if (key.empty()) throw ParseError(path, line_no, "empty key");
        if (kv.count(key)) throw ParseError(path, line_no, "duplicate key '" + key + "'");
        kv[key] = detail::trim(t.substr(eq + 1));
    }
    return kv;
}

inline KeyValues read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    return read_key_values(in, path);
}

// ---- circuit parameters ----------------------------------------------------

inline void write_params(std::ostream& out, const PztCircuitParams& p,
                         double residual = -1.0) {
    out.precision(17);
    out << "r_e_ohms=" << p.r_e << '\n'
        << "c_e_farads=" << p.c_e << '\n'
        << "re_zs_eff_ohms=" << p.re_zs_eff << '\n';
    if (residual >= 0.0) out << "# residual_ohms2=" << residual << '\n';
}

inline PztCircuitParams read_params(const std::string& path) {
    const KeyValues kv = read_key_values(path);
    PztCircuitParams p;
    for (const auto& [k, v] : kv) {
        if (k == "r_e_ohms")
            p.r_e = detail::parse_double(path, 0, v);
        else if (k == "c_e_farads")
            p.c_e = detail::parse_double(path, 0, v);
        else if (k == "re_zs_eff_ohms")
            p.re_zs_eff = detail::parse_double(path, 0, v);
        else
            throw ParseError(path, 0, "unknown key '" + k + "'");
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(path, 0, e.what());
    }
    return p;
}

// ---- matching network ------------------------------------------------------

inline void write_network(std::ostream& out, const CascadedNetwork& network) {
    out.precision(17);
    out << "z0_ohms=" << network.z0 << '\n';
    for (std::size_t i = 0; i < network.tiers.size(); ++i) {
        out << "tier_" << i + 1 << ".c_farads=" << network.tiers[i].c_m << '\n';
        out << "tier_" << i + 1 << ".l_henries=" << network.tiers[i].l_m << '\n';
    }
}

inline CascadedNetwork read_network(const std::string& path) {
    const KeyValues kv = read_key_values(path);
    CascadedNetwork net;
    net.tiers.clear();
    for (std::size_t i = 1; i <= 3; ++i) {
        const std::string ck = "tier_" + std::to_string(i) + ".c_farads";
        const std::string lk = "tier_" + std::to_string(i) + ".l_henries";
        if (!kv.count(ck) && !kv.count(lk)) break;
        if (!kv.count(ck) || !kv.count(lk))
            throw ParseError(path, 0, "tier " + std::to_string(i) + " incomplete");
        net.tiers.push_back({detail::parse_double(path, 0, kv.at(ck)),
                             detail::parse_double(path, 0, kv.at(lk))});
    }
    for (const auto& [k, v] : kv) {
        if (k == "z0_ohms") {
            net.z0 = detail::parse_double(path, 0, v);
        } else if (k.rfind("tier_", 0) != 0) {
            throw ParseError(path, 0, "unknown key '" + k + "'");
        }
    }
    try {
        net.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(path, 0, e.what());
    }
    return net;
}

inline void write_match_report(std::ostream& out, const SynthesisResult& result) {
    out << "entry_index,tier_count,freq_hz,gamma_mag\n";
    out.precision(17);
    for (const auto& r : result.rows)
        out << r.entry_index << ',' << r.tier_count << ',' << r.freq_hz << ','
            << r.gamma_mag << '\n';
}

// ---- beam outputs ----------------------------------------------------------

inline void write_beam_csv(std::ostream& out, const BeamPattern& pattern) {
    out << "# angle convention: 0 deg = array axis (+x), 90 deg = broadside (+y), CCW positive\n";
    out << "angle_deg,re,im,mag,mag_norm\n";
    out.precision(17);
    for (const auto& s : pattern.samples)
        out << s.angle_deg << ',' << s.pressure.real() << ',' << s.pressure.imag() << ','
            << s.magnitude << ',' << s.normalized << '\n';
}

inline void write_metrics_csv(std::ostream& out,
                              const std::vector<std::pair<std::string, BeamMetrics>>& rows) {
    out << "# angle convention: 0 deg = array axis (+x), 90 deg = broadside (+y), CCW positive\n";
    out << "scheme,lobe,angle_deg,mag_norm\n";
    out.precision(17);
    for (const auto& [scheme, m] : rows) {
        out << scheme << ",main," << m.main.angle_deg << ',' << m.main.normalized << '\n';
        for (const auto& l : m.grating_lobes)
            out << scheme << ",grating," << l.angle_deg << ',' << l.normalized << '\n';
        for (const auto& l : m.side_lobes)
            out << scheme << ",side," << l.angle_deg << ',' << l.normalized << '\n';
    }
}

// ---- waveforms -------------------------------------------------------------

inline void write_waveform(std::ostream& out, const Waveform& w) {
    out << "t_seconds,re,im\n";
    out.precision(17);
    for (std::size_t i = 0; i < w.samples.size(); ++i)
        out << static_cast<double>(i) / w.sample_rate << ',' << w.samples[i].real() << ','
            << w.samples[i].imag() << '\n';
}

// Accepts `t_seconds,re,im` (analytic) or `t_seconds,value` (real recording).
inline Waveform read_waveform(std::istream& in, const std::string& path = "<stream>") {
    Waveform w;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    bool analytic = true;
    double prev_t = 0.0;
    std::vector<double> times;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!header_seen) {
            if (t == "t_seconds,re,im")
                analytic = true;
            else if (t == "t_seconds,value")
                analytic = false;
            else
                throw ParseError(path, line_no,
                                 "expected 't_seconds,re,im' or 't_seconds,value' header");
            header_seen = true;
            continue;
        }
        const auto cols = detail::split(t, ',');
        const std::size_t want = analytic ? 3 : 2;
        if (cols.size() != want)
            throw ParseError(path, line_no, "expected " + std::to_string(want) + " columns");
        const double ts = detail::parse_double(path, line_no, cols[0]);
        if (!times.empty() && ts <= prev_t)
            throw ParseError(path, line_no, "time stamps must be strictly increasing");
        prev_t = ts;
        times.push_back(ts);
        if (analytic)
            w.samples.push_back({detail::parse_double(path, line_no, cols[1]),
                                 detail::parse_double(path, line_no, cols[2])});
        else
            w.samples.push_back({detail::parse_double(path, line_no, cols[1]), 0.0});
    }
    if (!header_seen) throw ParseError(path, line_no, "missing header line");
    if (times.size() < 2) throw ParseError(path, line_no, "need at least 2 samples");
    w.sample_rate = 1.0 / (times[1] - times[0]);
    try {
        w.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(path, line_no, e.what());
    }
    return w;
}

inline Waveform read_waveform(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    return read_waveform(in, path);
}

// ---- beam scenario configs -------------------------------------------------

struct BeamScenarioConfig {
    BeamScenario scenario;
    std::string scheme = "all"; // continuous | iq | 1bit | 2bit | all
};

// Structured key-value scenario document.  `incident_angle_deg` is the
// direction the plane wave arrives from, in the shared angle convention;
// unknown keys are rejected.
inline BeamScenarioConfig read_beam_scenario(const std::string& path) {
    const KeyValues kv = read_key_values(path);
    BeamScenarioConfig cfg;
    std::size_t element_count = 8;
    double spacing_wavelengths = 2.0;
    double incident_angle_deg = 90.0;
    for (const auto& [k, v] : kv) {
        if (k == "frequency_hz")
            cfg.scenario.wave.frequency = detail::parse_double(path, 0, v);
        else if (k == "sound_speed_mps")
            cfg.scenario.wave.sound_speed = detail::parse_double(path, 0, v);
        else if (k == "incident_angle_deg")
            incident_angle_deg = detail::parse_double(path, 0, v);
        else if (k == "element_count")
            element_count = static_cast<std::size_t>(detail::parse_double(path, 0, v));
        else if (k == "element_spacing_wavelengths")
            spacing_wavelengths = detail::parse_double(path, 0, v);
        else if (k == "steer_angle_deg")
            cfg.scenario.steer_deg = detail::parse_double(path, 0, v);
        else if (k == "ring_radius_m")
            cfg.scenario.ring.radius = detail::parse_double(path, 0, v);
        else if (k == "ring_count")
            cfg.scenario.ring.count = static_cast<std::size_t>(detail::parse_double(path, 0, v));
        else if (k == "z0_ohms")
            cfg.scenario.z0 = detail::parse_double(path, 0, v);
        else if (k == "scheme")
            cfg.scheme = v;
        else if (k == "stage_amplitudes") {
            cfg.scenario.stages.amplitudes.clear();
            for (const auto& tok : detail::split(v, ';'))
                cfg.scenario.stages.amplitudes.push_back(detail::parse_double(path, 0, tok));
        } else {
            throw ParseError(path, 0, "unknown key '" + k + "'");
        }
    }
    const double th = deg_to_rad(incident_angle_deg);
    cfg.scenario.wave.direction = {-std::cos(th), -std::sin(th)};
    cfg.scenario.array = ArrayConfig::uniform_linear(
        element_count, spacing_wavelengths * cfg.scenario.wave.wavelength());
    try {
        cfg.scenario.wave.validate();
        cfg.scenario.array.validate();
        cfg.scenario.ring.validate();
        cfg.scenario.stages.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(path, 0, e.what());
    }
    if (cfg.scheme != "all" && cfg.scheme != "continuous" && cfg.scheme != "iq" &&
        cfg.scheme != "1bit" && cfg.scheme != "2bit")
        throw ParseError(path, 0, "unknown scheme '" + cfg.scheme + "'");
    return cfg;
}

// ---- run manifest ----------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

struct RunManifest {
    std::string tool_version = kVersion;
    std::string config_digest; // fnv1a64 of the effective config bytes, hex
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    std::vector<std::pair<std::string, double>> stage_seconds;
};

inline void write_manifest(std::ostream& out, const RunManifest& m) {
    out << "tool_version=" << m.tool_version << '\n';
    out << "config_digest=" << m.config_digest << '\n';
    out << "seed=" << m.seed << '\n';
    for (const auto& o : m.outputs) out << "output=" << o << '\n';
    out.precision(6);
    for (const auto& [stage, secs] : m.stage_seconds)
        out << "wall_seconds." << stage << '=' << secs << '\n';
}

inline std::string hex_digest(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mlaris
