// ML-ARIS scenario runner: one executable, one subcommand per pipeline.
// Exit codes: 0 success, 1 computational failure (fit/optimize/extract),
// 2 input error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mlaris/mlaris.hpp"

namespace fs = std::filesystem;
using namespace mlaris;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 42;
    unsigned threads = 1;
    std::string out_dir = ".";
};

fs::path out_path(const GlobalOpts& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return fs::path(g.out_dir) / name;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::invalid_argument("cannot open output file: " + p.string());
    return f;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

int run_fit(const GlobalOpts& g, const std::string& sweep_file, const std::string& out_name) {
    const ImpedanceSweep sweep = read_sweep_csv(sweep_file);
    const FitResult fit = fit_params(sweep);
    auto f = open_out(out_path(g, out_name));
    write_params(f, fit.params, fit.residual);
    std::cout << "residual_ohms2=" << fit.residual
              << " relative_residual=" << fit.relative_residual
              << " iterations=" << fit.iterations << '\n';
    std::cout << "params written to " << out_path(g, out_name).string() << '\n';
    return 0;
}

int run_envelope(const GlobalOpts& g, const std::string& alpha_file,
                 const std::string& beta_file, std::size_t n_d, const std::string& out_name) {
    const PztCircuitParams alpha = read_params(alpha_file);
    const PztCircuitParams beta = read_params(beta_file);
    const ImpedanceEnvelope env = build_envelope(alpha, beta, n_d);
    auto f = open_out(out_path(g, out_name));
    f << "entry_index,r_e_ohms,c_e_farads,re_zs_eff_ohms\n";
    f.precision(17);
    for (std::size_t i = 0; i < env.n_d(); ++i)
        f << i + 1 << ',' << env.entries[i].r_e << ',' << env.entries[i].c_e << ','
          << env.entries[i].re_zs_eff << '\n';
    std::cout << "envelope with " << env.n_d() << " entries written to "
              << out_path(g, out_name).string() << '\n';
    return 0;
}

int run_match(const GlobalOpts& g, const std::string& alpha_file, const std::string& beta_file,
              std::size_t n_d, long tiers_flag, const FrequencyBand& band, double z0,
              AnnealConfig anneal) {
    if (tiers_flag > 0 && static_cast<std::size_t>(tiers_flag) * 3 != n_d)
        throw std::invalid_argument("--tiers must equal --nd / 3");
    const PztCircuitParams alpha = read_params(alpha_file);
    const PztCircuitParams beta = read_params(beta_file);
    const ImpedanceEnvelope env = build_envelope(alpha, beta, n_d);

    anneal.seed = g.seed;
    anneal.threads = g.threads;
    const double t0 = now_seconds();
    const SynthesisResult result = synthesize_network(env, band, z0, anneal);
    const double t1 = now_seconds();

    {
        auto f = open_out(out_path(g, "network.txt"));
        write_network(f, result.network);
    }
    {
        auto f = open_out(out_path(g, "match_report.csv"));
        write_match_report(f, result);
    }

    std::ostringstream cfg;
    cfg << "alpha=" << alpha_file << "\nbeta=" << beta_file << "\nnd=" << n_d
        << "\nf_low=" << band.f_low << "\nf_high=" << band.f_high
        << "\nn_grid=" << band.n_grid << "\nz0=" << z0 << "\nseed=" << g.seed
        << "\niters=" << anneal.iterations_per_temperature
        << "\nlevels=" << anneal.temperature_levels << "\nrestarts=" << anneal.restarts << '\n';
    RunManifest man;
    man.config_digest = hex_digest(fnv1a64(cfg.str()));
    man.seed = g.seed;
    man.outputs = {"network.txt", "match_report.csv"};
    man.stage_seconds = {{"synthesize", t1 - t0}};
    {
        auto f = open_out(out_path(g, "manifest.txt"));
        write_manifest(f, man);
    }

    for (std::size_t i = 0; i < result.worst_gamma.size(); ++i)
        std::cout << "entry " << i + 1 << " (tier " << i / 3 + 1
                  << "): worst |gamma| = " << result.worst_gamma[i] << '\n';
    return 0;
}

int run_select_tier(const std::string& params_file, const std::string& network_file,
                    double probe_f) {
    const PztCircuitParams params = read_params(params_file);
    const CascadedNetwork net = read_network(network_file);
    std::cout << "tier=" << select_tier(params, net, probe_f) << '\n';
    return 0;
}

int run_iq(double amplitude, double phase_deg, double z0, const std::string& stages_str) {
    StageSet stages;
    if (!stages_str.empty()) {
        stages.amplitudes.clear();
        std::stringstream ss(stages_str);
        std::string tok;
        while (std::getline(ss, tok, ';')) stages.amplitudes.push_back(std::stod(tok));
    }
    const ReflectionTarget target{amplitude, wrap_phase(deg_to_rad(phase_deg))};
    const LayerAssignment a = assign_loads(target, stages, z0);
    const Complex gamma = combined_gamma(a, z0);
    const Complex sum = combined_gamma_sum(a, z0);
    std::cout << "layer1=" << to_token(a.layer1) << " layer2=" << to_token(a.layer2) << '\n';
    std::cout << "combined_gamma=" << std::abs(gamma) << "@" << rad_to_deg(std::arg(gamma))
              << "deg sum=" << std::abs(sum) << "@" << rad_to_deg(std::arg(sum)) << "deg\n";
    return 0;
}

int run_beam(const GlobalOpts& g, const std::string& cfg_file, std::string scheme_flag,
             double ring_radius_flag) {
    BeamScenarioConfig cfg = read_beam_scenario(cfg_file);
    if (!scheme_flag.empty()) cfg.scheme = scheme_flag; // CLI flags win over the file
    if (ring_radius_flag > 0.0) cfg.scenario.ring.radius = ring_radius_flag;

    const auto kind_of = [](const std::string& s) {
        if (s == "continuous") return CodingScheme::Kind::Continuous;
        if (s == "iq") return CodingScheme::Kind::IQ;
        if (s == "1bit") return CodingScheme::Kind::OneBit;
        if (s == "2bit") return CodingScheme::Kind::TwoBit;
        throw std::invalid_argument("unknown scheme '" + s + "'");
    };

    const double t0 = now_seconds();
    std::vector<SchemeResult> results;
    if (cfg.scheme == "all")
        results = compare_schemes(cfg.scenario);
    else
        results.push_back(run_scheme(cfg.scenario, kind_of(cfg.scheme)));
    const double t1 = now_seconds();

    RunManifest man;
    man.seed = g.seed;
    std::vector<std::pair<std::string, BeamMetrics>> metric_rows;
    for (const auto& r : results) {
        const std::string name = CodingScheme::name(r.kind);
        const std::string beam_name = "beam_" + name + ".csv";
        auto f = open_out(out_path(g, beam_name));
        write_beam_csv(f, r.pattern);
        man.outputs.push_back(beam_name);
        metric_rows.emplace_back(name, r.metrics);
        if (!r.metrics.grating_lobes.empty())
            std::cout << name << ": grating lobe at " << r.metrics.grating_lobes.front().angle_deg
                      << " deg (normalized " << r.metrics.grating_lobes.front().normalized
                      << ")\n";
        std::cout << name << ": main lobe at " << r.metrics.main.angle_deg << " deg";
        if (r.metrics.first_side_lobe)
            std::cout << ", first side lobe " << r.metrics.first_side_lobe->normalized << " at "
                      << r.metrics.first_side_lobe->angle_deg << " deg";
        std::cout << '\n';
    }
    {
        auto f = open_out(out_path(g, "metrics.csv"));
        write_metrics_csv(f, metric_rows);
        man.outputs.push_back("metrics.csv");
    }

    std::ostringstream eff;
    eff << "config=" << cfg_file << "\nscheme=" << cfg.scheme
        << "\nring_radius=" << cfg.scenario.ring.radius << "\nseed=" << g.seed << '\n';
    man.config_digest = hex_digest(fnv1a64(eff.str()));
    man.stage_seconds = {{"beam", t1 - t0}};
    {
        auto f = open_out(out_path(g, "manifest.txt"));
        write_manifest(f, man);
    }
    return 0;
}

LayerAssignment parse_synthetic_scene(const std::string& scene_text, double z0) {
    const auto comma = scene_text.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("--synthetic expects two load tokens, e.g. C09,R2000");
    const LoadState a = parse_load_token(scene_text.substr(0, comma));
    const LoadState b = parse_load_token(scene_text.substr(comma + 1));
    // the reactive token drives the quadrature layer regardless of order
    const bool a_quad = a.kind == LoadKind::Capacitive || a.kind == LoadKind::Inductive;
    LayerAssignment out;
    out.layer1 = a_quad ? b : a;
    out.layer2 = a_quad ? a : b;
    (void)z0;
    return out;
}

int run_extract(const GlobalOpts& g, const std::string& synthetic, const std::string& r_load_file,
                const std::string& r_opop_file, const std::string& r_shsh_file, double z0,
                double carrier) {
    Waveform r_load, r_opop, r_shsh;
    SourceBurst burst;
    MultipathChannel channel;
    std::string token = "file";
    Complex theory{0.0, 0.0};
    bool have_theory = false;

    if (!synthetic.empty()) {
        const LayerAssignment assignment = parse_synthetic_scene(synthetic, z0);
        theory = theoretical_coefficient(assignment, z0);
        have_theory = true;
        token = to_token(assignment.layer1) + "," + to_token(assignment.layer2);

        burst.carrier_freq = 25000.0;
        burst.cycles = 500.0;
        burst.sample_rate = 400000.0;
        channel.ambient_taps = {{1.0, 0.3, 0.0}, {0.4, -1.2, 0.0031}, {0.2, 2.1, 0.0057}};
        channel.reflector_delays = {0.0012, 0.0044};

        ReflectorScene scene{{gamma_of_load(assignment.layer1, z0),
                              gamma_of_load(assignment.layer2, z0)}};
        const ReflectorScene opop{{Complex{1, 0}, Complex{1, 0}}};
        const ReflectorScene shsh{{Complex{-1, 0}, Complex{-1, 0}}};
        r_load = synthesize_received(channel, scene, burst);
        r_opop = synthesize_received(channel, opop, burst);
        r_shsh = synthesize_received(channel, shsh, burst);
    } else {
        if (r_load_file.empty() || r_opop_file.empty() || r_shsh_file.empty())
            throw std::invalid_argument(
                "extract needs --synthetic or all of --r-load/--r-opop/--r-shsh");
        r_load = read_waveform(r_load_file);
        r_opop = read_waveform(r_opop_file);
        r_shsh = read_waveform(r_shsh_file);
        const bool real_data =
            std::all_of(r_load.samples.begin(), r_load.samples.end(),
                        [](const Complex& s) { return s.imag() == 0.0; });
        if (real_data) {
            if (carrier <= 0.0)
                throw std::invalid_argument("real recordings need --carrier for demodulation");
            r_load = analytic_from_real(r_load, carrier);
            r_opop = analytic_from_real(r_opop, carrier);
            r_shsh = analytic_from_real(r_shsh, carrier);
        }
    }

    const Waveform b = extract_reflection(r_load, r_opop, r_shsh);
    const Waveform b_open = open_reference(r_opop, r_shsh);
    std::pair<double, double> window;
    if (!synthetic.empty()) {
        window = steady_state_window(channel, burst);
    } else {
        const double d = b.duration();
        window = {0.25 * d, 0.75 * d};
    }
    const ExtractionResult res = normalized_coefficient(b, b_open, window);

    auto f = open_out(out_path(g, "extract_report.csv"));
    f << "load_token,phase_deg,amplitude,theory_phase_deg,theory_amplitude\n";
    f.precision(10);
    f << token << ',' << res.phase_deg << ',' << res.amplitude << ',';
    if (have_theory)
        f << rad_to_deg(std::arg(theory)) << ',' << std::abs(theory) << '\n';
    else
        f << "," << '\n';
    std::cout << "coefficient: " << res.amplitude << "@" << res.phase_deg << "deg";
    if (have_theory)
        std::cout << " (theory " << std::abs(theory) << "@" << rad_to_deg(std::arg(theory))
                  << "deg)";
    std::cout << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ML-ARIS simulator: transducer fitting, matching synthesis, IQ modulation, "
                 "beam patterns and reflection extraction"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "random seed for stochastic stages");
    app.add_option("--threads", g.threads, "worker thread cap");
    app.add_option("--out-dir", g.out_dir, "directory for output files");

    // fit
    auto* fit = app.add_subcommand("fit", "fit circuit parameters from an impedance sweep");
    std::string sweep_file, fit_out = "fit_params.txt";
    fit->add_option("sweep", sweep_file, "sweep CSV (freq_hz,re_ohm,im_ohm)")->required();
    fit->add_option("--params-out", fit_out, "output parameter file name");

    // envelope
    auto* env = app.add_subcommand("envelope", "discretize the parameter envelope");
    std::string alpha_file, beta_file, env_out = "envelope.csv";
    std::size_t n_d = 9;
    env->add_option("--alpha", alpha_file, "alpha endpoint params file")->required();
    env->add_option("--beta", beta_file, "beta endpoint params file")->required();
    env->add_option("--nd", n_d, "number of envelope entries");
    env->add_option("--out", env_out, "output file name");

    // match
    auto* match = app.add_subcommand("match", "synthesize the cascaded matching network");
    std::string m_alpha, m_beta;
    std::size_t m_nd = 9;
    long m_tiers = -1;
    FrequencyBand band;
    double z0 = 1000.0;
    AnnealConfig anneal;
    match->add_option("--alpha", m_alpha, "alpha endpoint params file")->required();
    match->add_option("--beta", m_beta, "beta endpoint params file")->required();
    match->add_option("--nd", m_nd, "envelope entries (3 per tier)");
    match->add_option("--tiers", m_tiers, "tier count (must equal nd/3)");
    match->add_option("--f-low", band.f_low, "band lower edge, Hz");
    match->add_option("--f-high", band.f_high, "band upper edge, Hz");
    match->add_option("--n-grid", band.n_grid, "frequency grid points");
    match->add_option("--z0", z0, "target characteristic impedance, ohms");
    match->add_option("--iters", anneal.iterations_per_temperature, "SA iterations per level");
    match->add_option("--levels", anneal.temperature_levels, "SA temperature levels");
    match->add_option("--restarts", anneal.restarts, "SA restarts");

    // select-tier
    auto* sel = app.add_subcommand("select-tier", "pick the voltage-maximizing tier count");
    std::string sel_params, sel_network;
    double probe_f = 28000.0;
    sel->add_option("--params", sel_params, "true circuit params file")->required();
    sel->add_option("--network", sel_network, "network file")->required();
    sel->add_option("--probe-f", probe_f, "probe frequency, Hz");

    // iq
    auto* iq = app.add_subcommand("iq", "map a reflection target to two-layer loads");
    double iq_amp = 1.0, iq_phase = 0.0, iq_z0 = 1000.0;
    std::string iq_stages;
    iq->add_option("--amplitude", iq_amp, "target amplitude in [0,1]")->required();
    iq->add_option("--phase-deg", iq_phase, "target phase, degrees")->required();
    iq->add_option("--z0", iq_z0, "characteristic impedance, ohms");
    iq->add_option("--stages", iq_stages, "stage amplitudes, e.g. 0.3;0.6;0.9");

    // beam
    auto* beam = app.add_subcommand("beam", "beam patterns for the coding schemes");
    std::string beam_cfg, beam_scheme;
    double ring_radius = -1.0;
    beam->add_option("config", beam_cfg, "scenario config file")->required();
    beam->add_option("--scheme", beam_scheme, "continuous|iq|1bit|2bit|all (overrides config)");
    beam->add_option("--ring-radius", ring_radius, "probe ring radius override, m");

    // extract
    auto* ext = app.add_subcommand("extract", "recover the reflected-wave coefficient");
    std::string synthetic, rl_file, rop_file, rsh_file;
    double ext_z0 = 1000.0, ext_carrier = -1.0;
    ext->add_option("--synthetic", synthetic, "two load tokens, e.g. C09,R2000");
    ext->add_option("--r-load", rl_file, "load recording");
    ext->add_option("--r-opop", rop_file, "open/open reference recording");
    ext->add_option("--r-shsh", rsh_file, "short/short reference recording");
    ext->add_option("--z0", ext_z0, "characteristic impedance, ohms");
    ext->add_option("--carrier", ext_carrier, "carrier Hz (for real recordings)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*fit) return run_fit(g, sweep_file, fit_out);
        if (*env) return run_envelope(g, alpha_file, beta_file, n_d, env_out);
        if (*match) return run_match(g, m_alpha, m_beta, m_nd, m_tiers, band, z0, anneal);
        if (*sel) return run_select_tier(sel_params, sel_network, probe_f);
        if (*iq) return run_iq(iq_amp, iq_phase, iq_z0, iq_stages);
        if (*beam) return run_beam(g, beam_cfg, beam_scheme, ring_radius);
        if (*ext)
            return run_extract(g, synthetic, rl_file, rop_file, rsh_file, ext_z0, ext_carrier);
    } catch (const FitError& e) {
        std::cerr << "error: " << e.what() << " (best residual " << e.best.residual << ")\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
