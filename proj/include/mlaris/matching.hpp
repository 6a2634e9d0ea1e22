#pragma once

// Three-tier cascaded high-pass L-type matching network: cascade evaluation,
// the P1 reflection cost, simulated-annealing component optimization, and
// runtime tier selection by load-voltage comparison.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "mlaris/core.hpp"
#include "mlaris/transducer.hpp"

namespace mlaris {

struct LMatchTier {
    double c_m = 0.0; // series capacitor, farads
    double l_m = 0.0; // shunt inductor, henries

    void validate() const {
        require(c_m > 0.0 && std::isfinite(c_m), "tier: c_m must be > 0");
        require(l_m > 0.0 && std::isfinite(l_m), "tier: l_m must be > 0");
    }
};

struct CascadedNetwork {
    std::vector<LMatchTier> tiers; // tier 1 nearest the PZT
    double z0 = 1000.0;

    void validate() const {
        require(!tiers.empty() && tiers.size() <= 3, "network: 1-3 tiers required");
        require(z0 > 0.0 && std::isfinite(z0), "network: z0 must be > 0");
        for (const auto& t : tiers) t.validate();
    }
};

struct FrequencyBand {
    double f_low = 27500.0;
    double f_high = 28500.0;
    std::size_t n_grid = 41;

    void validate() const {
        require(f_low > 0.0 && f_low < f_high, "band: need 0 < f_low < f_high");
        require(n_grid >= 2, "band: n_grid must be >= 2");
    }

    std::vector<double> grid() const {
        validate();
        std::vector<double> g(n_grid);
        for (std::size_t i = 0; i < n_grid; ++i)
            g[i] = f_low + (f_high - f_low) * static_cast<double>(i) /
                               static_cast<double>(n_grid - 1);
        return g;
    }
};

struct AnnealConfig {
    double initial_temperature = 1.0; // on cost normalized per restart
    double cooling_factor = 0.95;
    std::size_t iterations_per_temperature = 200;
    std::size_t temperature_levels = 20;
    std::size_t restarts = 8;
    std::uint64_t seed = 42;
    double log10_c_low = -9.0;  // 1 nF
    double log10_c_high = -4.0; // 100 uF
    double log10_l_low = -5.0;  // 10 uH
    double log10_l_high = 1.0;  // 10 H
    unsigned threads = 1;

    void validate() const {
        require(initial_temperature > 0.0, "anneal: initial_temperature must be > 0");
        require(cooling_factor > 0.0 && cooling_factor < 1.0,
                "anneal: cooling_factor must be in (0,1)");
        require(iterations_per_temperature >= 1 && temperature_levels >= 1 && restarts >= 1,
                "anneal: counts must be >= 1");
        require(log10_c_low < log10_c_high && std::isfinite(log10_c_low) &&
                    std::isfinite(log10_c_high),
                "anneal: capacitor bounds invalid");
        require(log10_l_low < log10_l_high && std::isfinite(log10_l_low) &&
                    std::isfinite(log10_l_high),
                "anneal: inductor bounds invalid");
    }
};

// One L-section: series capacitor toward the source, shunt inductor to ground.
inline Complex tier_output_impedance(const Complex& z_in, const LMatchTier& tier, double f_hz) {
    tier.validate();
    require_domain(f_hz > 0.0 && std::isfinite(f_hz), "tier_output_impedance: f must be > 0");
    const double w = angular_frequency(f_hz);
    const Complex series = z_in + Complex{0.0, -1.0 / (w * tier.c_m)};
    const Complex shunt{0.0, w * tier.l_m};
    const Complex denom = series + shunt;
    if (std::abs(denom) < 1e-12)
        throw NumericError("tier_output_impedance: degenerate parallel combination");
    return series * shunt / denom;
}

inline Complex cascade_impedance(const PztCircuitParams& params, const CascadedNetwork& network,
                                 std::size_t active_tiers, double f_hz) {
    network.validate();
    require(active_tiers >= 1 && active_tiers <= network.tiers.size(),
            "cascade_impedance: active_tiers out of range");
    Complex z = simplified_impedance(params, f_hz);
    for (std::size_t i = 0; i < active_tiers; ++i)
        z = tier_output_impedance(z, network.tiers[i], f_hz);
    return z;
}

inline Complex reflection_at_load(const Complex& z_m, double z0) {
    require(z0 > 0.0 && std::isfinite(z0), "reflection_at_load: z0 must be > 0");
    require(is_finite(z_m), "reflection_at_load: z_m must be finite");
    const Complex denom = z_m + z0;
    if (std::abs(denom) == 0.0)
        throw NumericError("reflection_at_load: z_m = -z0 singularity");
    return (z_m - z0) / denom;
}

// P1 objective: sum of |Gamma|^3 over the three envelope entries assigned to
// this tier and the whole frequency grid, with `candidate` appended after the
// already-fixed prefix tiers.
inline double p1_cost(const CascadedNetwork& network_prefix, const LMatchTier& candidate,
                      const std::vector<PztCircuitParams>& envelope_triple,
                      const FrequencyBand& band, double z0) {
    require(envelope_triple.size() == 3, "p1_cost: exactly 3 envelope entries expected");
    candidate.validate();
    const auto grid = band.grid();
    CascadedNetwork full;
    full.tiers = network_prefix.tiers;
    full.tiers.push_back(candidate);
    full.z0 = z0;
    double cost = 0.0;
    for (const auto& params : envelope_triple) {
        for (double f : grid) {
            const Complex z = cascade_impedance(params, full, full.tiers.size(), f);
            const double g = std::abs(reflection_at_load(z, z0));
            cost += g * g * g;
        }
    }
    return cost;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct RestartOutcome {
    double cost = std::numeric_limits<double>::infinity();
    double lc = 0.0; // log10 c_m
    double ll = 0.0; // log10 l_m
};

}  // namespace detail

// Simulated annealing over (log10 c_m, log10 l_m) followed by a deterministic
// compass-search polish.  Deterministic for a given seed; restarts may run on
// worker threads, the reduction picks the minimum cost with ties broken by
// the lowest restart index.
inline LMatchTier optimize_tier(const CascadedNetwork& network_prefix,
                                const std::vector<PztCircuitParams>& envelope_triple,
                                const FrequencyBand& band, double z0,
                                const AnnealConfig& anneal, double* reported_cost = nullptr) {
    anneal.validate();
    band.validate();
    require(envelope_triple.size() == 3, "optimize_tier: exactly 3 envelope entries expected");

    const auto eval = [&](double lc, double ll) {
        LMatchTier t{std::pow(10.0, lc), std::pow(10.0, ll)};
        return p1_cost(network_prefix, t, envelope_triple, band, z0);
    };
    const auto clamp_c = [&](double v) { return std::clamp(v, anneal.log10_c_low, anneal.log10_c_high); };
    const auto clamp_l = [&](double v) { return std::clamp(v, anneal.log10_l_low, anneal.log10_l_high); };

    const auto run_restart = [&](std::size_t restart) {
        std::mt19937_64 rng(detail::splitmix64(anneal.seed ^ (0xA5C3ULL + restart)));
        std::uniform_real_distribution<double> uc(anneal.log10_c_low, anneal.log10_c_high);
        std::uniform_real_distribution<double> ul(anneal.log10_l_low, anneal.log10_l_high);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        double lc = uc(rng), ll = ul(rng);
        double cost = eval(lc, ll);
        const double cref = std::max(cost, 1e-300); // normalizes the acceptance scale
        detail::RestartOutcome best{cost, lc, ll};

        double temp = anneal.initial_temperature;
        const double range_c = anneal.log10_c_high - anneal.log10_c_low;
        const double range_l = anneal.log10_l_high - anneal.log10_l_low;
        for (std::size_t level = 0; level < anneal.temperature_levels; ++level) {
            for (std::size_t it = 0; it < anneal.iterations_per_temperature; ++it) {
                const double nlc = clamp_c(lc + gauss(rng) * 0.25 * temp * range_c);
                const double nll = clamp_l(ll + gauss(rng) * 0.25 * temp * range_l);
                const double ncost = eval(nlc, nll);
                const double dc = (ncost - cost) / cref;
                if (dc <= 0.0 || u01(rng) < std::exp(-dc / temp)) {
                    lc = nlc;
                    ll = nll;
                    cost = ncost;
                    if (cost < best.cost) best = {cost, lc, ll};
                }
            }
            temp *= anneal.cooling_factor;
        }

        // Deterministic compass-search polish from the best SA point.  The
        // step expands on success so flat basins are crossed in large moves
        // instead of crawled at the terminal resolution; the round cap keeps
        // the worst case bounded.
        double h = 0.1;
        for (std::size_t round = 0; h > 1e-7 && round < 4000; ++round) {
            bool improved = false;
            const double cand[4][2] = {{best.lc + h, best.ll}, {best.lc - h, best.ll},
                                       {best.lc, best.ll + h}, {best.lc, best.ll - h}};
            for (const auto& c : cand) {
                const double plc = clamp_c(c[0]);
                const double pll = clamp_l(c[1]);
                const double pc = eval(plc, pll);
                if (pc < best.cost) {
                    best = {pc, plc, pll};
                    improved = true;
                }
            }
            h = improved ? std::min(2.0 * h, 0.1) : 0.5 * h;
        }
        return best;
    };

    std::vector<detail::RestartOutcome> outcomes(anneal.restarts);
    const unsigned workers = std::max(1u, std::min<unsigned>(
        anneal.threads, static_cast<unsigned>(anneal.restarts)));
    if (workers <= 1) {
        for (std::size_t r = 0; r < anneal.restarts; ++r) outcomes[r] = run_restart(r);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t r = next.fetch_add(1); r < anneal.restarts;
                     r = next.fetch_add(1))
                    outcomes[r] = run_restart(r);
            });
        }
        for (auto& t : pool) t.join();
    }

    std::size_t best_idx = 0;
    for (std::size_t r = 1; r < anneal.restarts; ++r)
        if (outcomes[r].cost < outcomes[best_idx].cost) best_idx = r;
    const auto& b = outcomes[best_idx];
    if (reported_cost) *reported_cost = b.cost;
    return LMatchTier{std::pow(10.0, b.lc), std::pow(10.0, b.ll)};
}

struct MatchReportRow {
    std::size_t entry_index = 0; // 1-based envelope index
    std::size_t tier_count = 0;
    double freq_hz = 0.0;
    double gamma_mag = 0.0;
};

struct SynthesisResult {
    CascadedNetwork network;
    std::vector<double> tier_costs;         // reported P1 cost per tier
    std::vector<double> worst_gamma;        // per envelope entry, at its tier count
    std::vector<MatchReportRow> rows;       // full per-frequency table
};

// Sequential tier design: tier k is optimized for envelope entries
// 3k-2 .. 3k with the earlier tiers held fixed.
inline SynthesisResult synthesize_network(const ImpedanceEnvelope& envelope,
                                          const FrequencyBand& band, double z0,
                                          const AnnealConfig& anneal) {
    require(envelope.n_d() >= 3 && envelope.n_d() % 3 == 0,
            "synthesize_network: n_d must be a positive multiple of 3");
    const std::size_t n_tiers = envelope.n_d() / 3;
    require(n_tiers <= 3, "synthesize_network: at most 3 tiers supported");

    SynthesisResult out;
    out.network.z0 = z0;
    for (std::size_t k = 0; k < n_tiers; ++k) {
        const std::vector<PztCircuitParams> triple(envelope.entries.begin() + 3 * k,
                                                   envelope.entries.begin() + 3 * k + 3);
        AnnealConfig tier_anneal = anneal;
        tier_anneal.seed = detail::splitmix64(anneal.seed + k);
        double cost = 0.0;
        out.network.tiers.push_back(
            optimize_tier(out.network, triple, band, z0, tier_anneal, &cost));
        out.tier_costs.push_back(cost);
    }

    const auto grid = band.grid();
    for (std::size_t i = 0; i < envelope.n_d(); ++i) {
        const std::size_t tier_count = i / 3 + 1;
        double worst = 0.0;
        for (double f : grid) {
            const Complex z = cascade_impedance(envelope.entries[i], out.network, tier_count, f);
            const double g = std::abs(reflection_at_load(z, z0));
            worst = std::max(worst, g);
            out.rows.push_back({i + 1, tier_count, f, g});
        }
        out.worst_gamma.push_back(worst);
    }
    return out;
}

// Load voltage magnitude for a unit-EMF Thevenin source with internal
// impedance `z_source` driving the first `prefix` tiers terminated in z0.
// Each tier contributes the ABCD pair: series -j/(wC) then shunt 1/(jwL).
inline double prefix_load_voltage(const Complex& z_source, const CascadedNetwork& network,
                                  std::size_t prefix, double f_hz) {
    network.validate();
    require(prefix >= 1 && prefix <= network.tiers.size(),
            "prefix_load_voltage: prefix out of range");
    const double w = angular_frequency(f_hz);
    Complex a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};
    for (std::size_t i = 0; i < prefix; ++i) {
        const Complex zs{0.0, -1.0 / (w * network.tiers[i].c_m)};
        const Complex ysh = 1.0 / Complex{0.0, w * network.tiers[i].l_m};
        // right-multiply by [1 zs; 0 1] then [1 0; ysh 1]
        b += a * zs;
        d += c * zs;
        a += b * ysh;
        c += d * ysh;
    }
    const Complex denom = (a + b / network.z0) + z_source * (c + d / network.z0);
    const double m = std::abs(denom);
    if (m < 1e-300) return std::numeric_limits<double>::infinity();
    return 1.0 / m;
}

// Pick the cumulative tier count that maximizes load voltage; ties go to
// fewer tiers (less insertion loss from unused stages).
inline std::size_t select_tier(const PztCircuitParams& true_params,
                               const CascadedNetwork& network, double probe_f) {
    network.validate();
    const Complex zs = simplified_impedance(true_params, probe_f);
    std::size_t best = 1;
    double best_v = prefix_load_voltage(zs, network, 1, probe_f);
    for (std::size_t p = 2; p <= network.tiers.size(); ++p) {
        const double v = prefix_load_voltage(zs, network, p, probe_f);
        if (v > best_v) {
            best = p;
            best_v = v;
        }
    }
    return best;
}

}  // namespace mlaris
