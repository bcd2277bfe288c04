// Command-line front end.  Flags are translated into a JSON config and
// handed to the shared library; every default lives in the library so the
// manifest written next to the outputs is the single source of truth.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spikedim.h"

namespace {

using nlohmann::json;

struct Flags {
    std::string input;
    std::string format = "csv";
    std::string output_dir;
    std::string manifest;

    std::string noise_method = "none";
    double band_fraction = 0.25;
    int ar_order = 5;
    double threshold_constant = 1.0;
    std::vector<double> baseline_ms;
    bool global_noise = false;

    double epsilon0 = 0.0;
    double epsilon0_frac = 0.0;
    double delta = 0.0;
    double epsilon_prime = 0.0;
    int mc_samples = 100;
    std::string dist = "gaussian";
    std::string stop_rule = "fraction";
    double fraction_p = 0.4;
    std::uint64_t seed = 1;
    bool strict_pure_noise = false;
    bool no_center = false;
    bool normalize = false;

    std::vector<std::string> snr;
    int sensors = 128;
    long samples = 1000;
    int trials = 5;
    double sample_period_ms = 1.0;

    double window_ms = 2000.0;
    double stride_ms = 600.0;
    bool no_plot = false;
};

json snr_entry(const std::string& s) {
    if (s == "inf") return "inf";
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (...) {
    }
    return s;  // let the library report the bad value
}

template <typename T>
void set_if(const CLI::App* cmd, const std::string& flag, json& obj,
            const char* key, const T& value) {
    if (cmd->count(flag) > 0) obj[key] = value;
}

void add_io_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--input", f.input, "input recording")->required();
    cmd->add_option("--format", f.format, "input format: csv or raw-f64");
    cmd->add_option("--sample-period-ms", f.sample_period_ms,
                    "sample period in milliseconds");
}

void add_noise_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--noise-method", f.noise_method,
                    "noise covariance estimator: fft, residual, threshold, "
                    "brute or none")
        ->check(CLI::IsMember({"fft", "residual", "threshold", "brute", "none"}));
    cmd->add_option("--band-fraction", f.band_fraction,
                    "top frequency-band share used by the fft method");
    cmd->add_option("--ar-order", f.ar_order,
                    "autoregressive order for residual/threshold methods");
    cmd->add_option("--threshold-constant", f.threshold_constant,
                    "off-diagonal threshold scale for the threshold method");
    cmd->add_option("--noise-baseline-ms", f.baseline_ms,
                    "restrict noise estimation to [start, end] milliseconds")
        ->expected(2);
    cmd->add_flag("--global-noise", f.global_noise,
                  "for windowed runs: estimate the noise covariance once "
                  "from the whole recording instead of per window");
}

void add_spike_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--epsilon0", f.epsilon0, "base resolution (absolute)");
    cmd->add_option("--epsilon0-frac", f.epsilon0_frac,
                    "base resolution as a fraction of the top eigenvalue");
    cmd->add_option("--delta", f.delta, "manual spiked/bulk cut-off");
    cmd->add_option("--epsilon-prime", f.epsilon_prime,
                    "exclusion radius in the spike estimator");
    cmd->add_option("--mc-samples", f.mc_samples,
                    "Monte Carlo draws per epsilon candidate");
    cmd->add_option("--dist", f.dist,
                    "reference distribution: gaussian, uniform or t")
        ->check(CLI::IsMember({"gaussian", "uniform", "t"}));
    cmd->add_option("--stop-rule", f.stop_rule,
                    "epsilon search stop rule: fraction or span")
        ->check(CLI::IsMember({"fraction", "span"}));
    cmd->add_option("--fraction-p", f.fraction_p,
                    "stop fraction of the top eigenvalue");
    cmd->add_flag("--strict-pure-noise", f.strict_pure_noise,
                  "fail instead of reporting zero sources on pure noise");
    cmd->add_flag("--no-center", f.no_center,
                  "skip mean removal in the sample covariance");
    cmd->add_flag("--normalize", f.normalize,
                  "rescale data so the covariance has spectral norm K");
}

void add_sim_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--snr", f.snr,
                    "signal-to-noise ratio, repeatable; a number or 'inf'")
        ->take_all();
    cmd->add_option("--sensors", f.sensors, "number of sensors");
    cmd->add_option("--samples", f.samples, "samples per trial");
    cmd->add_option("--trials", f.trials, "trials to average");
    cmd->add_option("--sample-period-ms", f.sample_period_ms,
                    "sample period in milliseconds");
    cmd->add_option("--seed", f.seed, "random seed");
}

json noise_json(const CLI::App* cmd, const Flags& f) {
    json n = json::object();
    set_if(cmd, "--noise-method", n, "method", f.noise_method);
    set_if(cmd, "--band-fraction", n, "band_fraction", f.band_fraction);
    set_if(cmd, "--ar-order", n, "ar_order", f.ar_order);
    set_if(cmd, "--threshold-constant", n, "threshold_constant",
           f.threshold_constant);
    set_if(cmd, "--noise-baseline-ms", n, "baseline_ms", f.baseline_ms);
    if (cmd->count("--global-noise") > 0) n["global"] = true;
    return n;
}

json spike_json(const CLI::App* cmd, const Flags& f) {
    json s = json::object();
    set_if(cmd, "--epsilon0", s, "epsilon0", f.epsilon0);
    set_if(cmd, "--epsilon0-frac", s, "epsilon0_frac", f.epsilon0_frac);
    set_if(cmd, "--delta", s, "delta", f.delta);
    set_if(cmd, "--epsilon-prime", s, "epsilon_prime", f.epsilon_prime);
    set_if(cmd, "--mc-samples", s, "mc_samples", f.mc_samples);
    set_if(cmd, "--dist", s, "dist", f.dist);
    set_if(cmd, "--stop-rule", s, "stop_rule", f.stop_rule);
    set_if(cmd, "--fraction-p", s, "fraction_p", f.fraction_p);
    if (cmd->count("--strict-pure-noise") > 0) s["strict_pure_noise"] = true;
    if (cmd->count("--no-center") > 0) s["center"] = false;
    if (cmd->count("--normalize") > 0) s["normalize"] = true;
    return s;
}

void add_optional_objects(const CLI::App* cmd, const Flags& f, json& cfg) {
    json n = noise_json(cmd, f);
    json s = spike_json(cmd, f);
    if (!n.empty()) cfg["noise"] = n;
    if (!s.empty()) cfg["spike"] = s;
}

int run(const json& cfg, const std::string& output_dir) {
    const int code = sd_run(cfg.dump().c_str(), output_dir.c_str());
    if (code != 0) std::fprintf(stderr, "error: %s\n", sd_last_error());
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spikedim — intrinsic dimensionality of multichannel "
                 "time series"};
    app.set_version_flag("--version", sd_version());
    app.require_subcommand(1);
    Flags f;

    CLI::App* simulate = app.add_subcommand(
        "simulate", "generate a synthetic multichannel recording");
    add_sim_flags(simulate, f);
    simulate->add_option("--format", f.format, "output format: csv or raw-f64");
    simulate->add_option("--output-dir", f.output_dir, "output directory")
        ->required();

    CLI::App* estimate = app.add_subcommand(
        "estimate", "estimate the number of latent sources in a recording");
    add_io_flags(estimate, f);
    add_noise_flags(estimate, f);
    add_spike_flags(estimate, f);
    estimate->add_option("--seed", f.seed, "random seed");
    estimate->add_option("--output-dir", f.output_dir, "output directory")
        ->required();

    CLI::App* compare = app.add_subcommand(
        "compare", "sweep simulated SNR levels and tabulate all estimators");
    add_sim_flags(compare, f);
    add_noise_flags(compare, f);
    add_spike_flags(compare, f);
    compare->add_option("--output-dir", f.output_dir, "output directory")
        ->required();

    CLI::App* window = app.add_subcommand(
        "window", "track the source count over sliding windows");
    add_io_flags(window, f);
    add_noise_flags(window, f);
    add_spike_flags(window, f);
    window->add_option("--seed", f.seed, "random seed");
    window->add_option("--window-ms", f.window_ms,
                       "window length in milliseconds");
    window->add_option("--stride-ms", f.stride_ms,
                       "stride between window starts in milliseconds");
    window->add_flag("--no-plot", f.no_plot, "skip the SVG plot");
    window->add_option("--output-dir", f.output_dir, "output directory")
        ->required();

    CLI::App* rerun = app.add_subcommand(
        "rerun", "reproduce a previous run from its manifest.json");
    rerun->add_option("manifest", f.manifest, "path to manifest.json")
        ->required();
    rerun->add_option("--output-dir", f.output_dir,
                      "write outputs here instead of the manifest's directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : SD_ERR_CONFIG;
    }

    json cfg;
    if (simulate->parsed()) {
        cfg["command"] = "simulate";
        set_if(simulate, "--seed", cfg, "seed", f.seed);
        set_if(simulate, "--sensors", cfg, "sensors", f.sensors);
        set_if(simulate, "--samples", cfg, "samples", f.samples);
        set_if(simulate, "--trials", cfg, "trials", f.trials);
        set_if(simulate, "--sample-period-ms", cfg, "sample_period_ms",
               f.sample_period_ms);
        set_if(simulate, "--format", cfg, "data_format", f.format);
        if (!f.snr.empty()) {
            cfg["snr"] = json::array();
            for (const auto& s : f.snr) cfg["snr"].push_back(snr_entry(s));
        }
        return run(cfg, f.output_dir);
    }
    if (estimate->parsed() || window->parsed()) {
        const CLI::App* cmd = estimate->parsed() ? estimate : window;
        cfg["command"] = estimate->parsed() ? "estimate" : "window";
        cfg["input"] = f.input;
        set_if(cmd, "--format", cfg, "format", f.format);
        set_if(cmd, "--sample-period-ms", cfg, "sample_period_ms",
               f.sample_period_ms);
        set_if(cmd, "--seed", cfg, "seed", f.seed);
        if (window->parsed()) {
            set_if(cmd, "--window-ms", cfg, "window_ms", f.window_ms);
            set_if(cmd, "--stride-ms", cfg, "stride_ms", f.stride_ms);
            if (cmd->count("--no-plot") > 0) cfg["plot"] = false;
        }
        add_optional_objects(cmd, f, cfg);
        return run(cfg, f.output_dir);
    }
    if (compare->parsed()) {
        cfg["command"] = "compare";
        set_if(compare, "--seed", cfg, "seed", f.seed);
        set_if(compare, "--sensors", cfg, "sensors", f.sensors);
        set_if(compare, "--samples", cfg, "samples", f.samples);
        set_if(compare, "--trials", cfg, "trials", f.trials);
        set_if(compare, "--sample-period-ms", cfg, "sample_period_ms",
               f.sample_period_ms);
        if (!f.snr.empty()) {
            cfg["snr"] = json::array();
            for (const auto& s : f.snr) cfg["snr"].push_back(snr_entry(s));
        }
        add_optional_objects(compare, f, cfg);
        return run(cfg, f.output_dir);
    }
    // rerun
    const int code = sd_rerun(f.manifest.c_str(),
                              f.output_dir.empty() ? nullptr
                                                   : f.output_dir.c_str());
    if (code != 0) std::fprintf(stderr, "error: %s\n", sd_last_error());
    return code;
}
