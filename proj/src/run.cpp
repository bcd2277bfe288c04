#include "run.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "baselines.hpp"
#include "io.hpp"
#include "noise.hpp"
#include "simulate.hpp"
#include "spike.hpp"

namespace spikedim {

namespace {

using nlohmann::json;

double snr_from_json(const json& v) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf")
            return std::numeric_limits<double>::infinity();
        throw ConfigError("SNR must be a positive number or \"inf\"");
    }
    if (!v.is_number()) throw ConfigError("SNR must be a number or \"inf\"");
    const double s = v.get<double>();
    if (!(s > 0.0)) throw ConfigError("SNR must be positive");
    return s;
}

json snr_to_json(double s) {
    if (std::isinf(s)) return "inf";
    return s;
}

std::string snr_label(double s) {
    if (std::isinf(s)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", s);
    return buf;
}

IDConfig spike_config(const json& j) {
    IDConfig c;
    if (!j.at("epsilon0").is_null()) c.epsilon0 = j.at("epsilon0").get<double>();
    if (!j.at("epsilon0_frac").is_null())
        c.epsilon0_frac = j.at("epsilon0_frac").get<double>();
    if (!j.at("delta").is_null()) c.delta = j.at("delta").get<double>();
    if (!j.at("epsilon_prime").is_null())
        c.epsilon_prime = j.at("epsilon_prime").get<double>();
    c.mc_samples = j.at("mc_samples").get<int>();
    c.dist = dist_from_string(j.at("dist").get<std::string>());
    const std::string rule = j.at("stop_rule").get<std::string>();
    if (rule == "fraction")
        c.stop.kind = StopRule::Fraction;
    else if (rule == "span")
        c.stop.kind = StopRule::Span;
    else
        throw ConfigError("stop_rule must be 'fraction' or 'span'");
    c.stop.p = j.at("fraction_p").get<double>();
    c.strict_pure_noise = j.at("strict_pure_noise").get<bool>();
    c.center = j.at("center").get<bool>();
    c.normalize = j.at("normalize").get<bool>();
    c.eig_floor = j.at("eig_floor").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

NoiseParams noise_params(const json& j) {
    NoiseParams p;
    p.band_fraction = j.at("band_fraction").get<double>();
    p.ar_order = j.at("ar_order").get<int>();
    p.threshold_constant = j.at("threshold_constant").get<double>();
    if (!j.at("baseline_ms").is_null()) {
        const auto& b = j.at("baseline_ms");
        if (!b.is_array() || b.size() != 2)
            throw ConfigError("baseline_ms must be [start_ms, end_ms]");
        p.baseline_ms = {{b[0].get<double>(), b[1].get<double>()}};
    }
    return p;
}

json defaults_spike(const json& in, std::uint64_t seed) {
    json d = {
        {"epsilon0", nullptr},      {"epsilon0_frac", nullptr},
        {"delta", nullptr},         {"epsilon_prime", nullptr},
        {"mc_samples", 100},        {"dist", "gaussian"},
        {"stop_rule", "fraction"},  {"fraction_p", 0.4},
        {"strict_pure_noise", false}, {"center", true},
        {"normalize", false},       {"eig_floor", 1e-10},
        {"seed", seed},
    };
    for (auto it = in.begin(); it != in.end(); ++it) {
        if (!d.contains(it.key()))
            throw ConfigError("unknown spike option '" + it.key() + "'");
        d[it.key()] = it.value();
    }
    return d;
}

json defaults_noise(const json& in) {
    json d = {
        {"method", "none"},          {"band_fraction", 0.25},
        {"ar_order", 5},             {"threshold_constant", 1.0},
        {"baseline_ms", nullptr},    {"global", false},
    };
    for (auto it = in.begin(); it != in.end(); ++it) {
        if (!d.contains(it.key()))
            throw ConfigError("unknown noise option '" + it.key() + "'");
        d[it.key()] = it.value();
    }
    if (d["method"] != "none") noise_method_from_string(d["method"].get<std::string>());
    return d;
}

// Whiten-or-not wrapper shared by estimate / compare / window.
IDReport estimate_with_noise(const DataMatrix& data, const json& noise_cfg,
                             const IDConfig& cfg,
                             std::vector<std::string>* extra_warnings,
                             const NoiseEstimate* precomputed = nullptr) {
    const std::string method = noise_cfg.at("method").get<std::string>();
    if (method == "none") return intrinsic_dimensionality(data, nullptr, cfg);
    NoiseEstimate est;
    if (precomputed != nullptr) {
        est = *precomputed;
    } else {
        est = estimate_noise(data, noise_method_from_string(method),
                             noise_params(noise_cfg));
    }
    if (extra_warnings != nullptr)
        for (const auto& w : est.warnings) extra_warnings->push_back(w);
    return intrinsic_dimensionality(data, &est.covariance, cfg);
}

void write_manifest(const json& resolved, const std::string& dir) {
    write_file_atomic(dir + "/manifest.json", resolved.dump(2) + "\n");
}

SimulationConfig sim_config(const json& cfg, double snr) {
    SimulationConfig sc;
    sc.n_sensors = cfg.at("sensors").get<int>();
    sc.T = cfg.at("samples").get<long>();
    sc.n_trials = cfg.at("trials").get<int>();
    sc.sample_period_ms = cfg.at("sample_period_ms").get<double>();
    sc.seed = cfg.at("seed").get<std::uint64_t>();
    sc.snr = snr;
    return sc;
}

void run_simulate(const json& cfg, const std::string& dir) {
    const DataFormat fmt =
        format_from_string(cfg.at("data_format").get<std::string>());
    const char* ext = fmt == DataFormat::Csv ? "csv" : "raw";
    std::vector<std::string> warnings;
    int n_dipoles = 0;
    bool first = true;
    for (const auto& s : cfg.at("snr")) {
        const double snr = snr_from_json(s);
        SimulationResult res = simulate(sim_config(cfg, snr));
        n_dipoles = res.n_dipoles;
        warnings = res.warnings;
        write_data(res.averaged,
                   dir + "/data_snr_" + snr_label(snr) + "." + ext, fmt);
        if (first) {
            // The noiseless signal depends only on the geometry seed, so one
            // copy covers every SNR level.
            write_data(DataMatrix(res.clean_signal,
                                  cfg.at("sample_period_ms").get<double>()),
                       dir + "/clean." + ext, fmt);
            first = false;
        }
    }
    std::string truth = "n_dipoles = " + std::to_string(n_dipoles) + "\n";
    truth += "clean_signal = clean." + std::string(ext) + "\n";
    for (size_t i = 0; i < warnings.size(); ++i)
        truth += "warning_" + std::to_string(i + 1) + " = " + warnings[i] + "\n";
    write_file_atomic(dir + "/truth.txt", truth);
    write_manifest(cfg, dir);
}

void run_estimate(const json& cfg, const std::string& dir) {
    const DataMatrix data =
        read_data(cfg.at("input").get<std::string>(),
                  format_from_string(cfg.at("format").get<std::string>()));
    DataMatrix with_period(data.values,
                           cfg.at("sample_period_ms").get<double>());
    std::vector<std::string> extra;
    IDReport rep = estimate_with_noise(with_period, cfg.at("noise"),
                                       spike_config(cfg.at("spike")), &extra);
    for (const auto& w : extra) rep.warnings.push_back(w);
    write_file_atomic(
        dir + "/report.txt",
        report_to_keyvalue(rep, with_period.channels(), with_period.samples(),
                           cfg.at("noise").at("method").get<std::string>()));
    write_file_atomic(dir + "/eigenvalues.csv", report_to_csv(rep));
    write_file_atomic(dir + "/spectrum.svg", report_to_svg(rep));
    write_manifest(cfg, dir);
}

void run_compare(const json& cfg, const std::string& dir) {
    const IDConfig spike_cfg = spike_config(cfg.at("spike"));
    const json& noise_cfg = cfg.at("noise");
    std::string csv =
        "snr,pca_0.9,pca_0.8,pca_0.7,aic,mdl,eif,spe_fft,spe_residual,"
        "spe_threshold\n";
    for (const auto& s : cfg.at("snr")) {
        const double snr = snr_from_json(s);
        SimulationResult res = simulate(sim_config(cfg, snr));
        // Baselines consume the raw (unwhitened) spectrum, as a practitioner
        // would run them; the spiked-model estimator runs on the whitened one.
        const Eigen::VectorXd raw_eigs =
            eigenvalues_descending(sample_covariance(res.averaged, true));
        const long T = res.averaged.samples();
        csv += snr_label(snr);
        csv += ',' + std::to_string(pca_count(raw_eigs, 0.9).argmin_or_count);
        csv += ',' + std::to_string(pca_count(raw_eigs, 0.8).argmin_or_count);
        csv += ',' + std::to_string(pca_count(raw_eigs, 0.7).argmin_or_count);
        csv += ',' + std::to_string(aic_count(raw_eigs, T).argmin_or_count);
        csv += ',' + std::to_string(mdl_count(raw_eigs, T).argmin_or_count);
        csv += ',' + std::to_string(eif_count(raw_eigs, T).argmin_or_count);
        for (const char* method : {"fft", "residual", "threshold"}) {
            json ncfg = noise_cfg;
            ncfg["method"] = method;
            IDReport rep =
                estimate_with_noise(res.averaged, ncfg, spike_cfg, nullptr);
            csv += ',' + std::to_string(rep.L);
        }
        csv += '\n';
    }
    write_file_atomic(dir + "/compare.csv", csv);
    write_manifest(cfg, dir);
}

void run_window(const json& cfg, const std::string& dir) {
    const DataMatrix raw =
        read_data(cfg.at("input").get<std::string>(),
                  format_from_string(cfg.at("format").get<std::string>()));
    const double period = cfg.at("sample_period_ms").get<double>();
    const DataMatrix data(raw.values, period);
    const double window_ms = cfg.at("window_ms").get<double>();
    const double stride_ms = cfg.at("stride_ms").get<double>();
    if (!(window_ms > 0.0) || !(stride_ms > 0.0))
        throw ConfigError("window and stride must be positive");
    if (stride_ms > window_ms)
        throw ConfigError("stride must not exceed the window length");
    const long len = static_cast<long>(std::llround(window_ms / period));
    const long total = data.samples();
    if (len < 2) throw ConfigError("window shorter than 2 samples");
    if (len > total)
        throw ConfigError("window (" + std::to_string(len) +
                          " samples) longer than the recording (" +
                          std::to_string(total) + ")");

    const IDConfig spike_cfg = spike_config(cfg.at("spike"));
    const json& noise_cfg = cfg.at("noise");
    const bool global_noise = noise_cfg.at("global").get<bool>();
    const std::string method = noise_cfg.at("method").get<std::string>();
    NoiseEstimate global_est;
    if (global_noise && method != "none")
        global_est = estimate_noise(data, noise_method_from_string(method),
                                    noise_params(noise_cfg));

    auto sweep = [&](long stride_samples) {
        std::vector<WindowRow> rows;
        const long n = (total - len) / stride_samples + 1;
        for (long w = 0; w < n; ++w) {
            const long start = w * stride_samples;
            const DataMatrix win(data.values.middleCols(start, len), period);
            IDReport rep = estimate_with_noise(
                win, noise_cfg, spike_cfg, nullptr,
                global_noise && method != "none" ? &global_est : nullptr);
            rows.push_back({static_cast<double>(start) * period,
                            static_cast<double>(start + len) * period, rep.L});
        }
        return rows;
    };
    const long stride = static_cast<long>(std::llround(stride_ms / period));
    if (stride < 1) throw ConfigError("stride shorter than one sample");
    const std::vector<WindowRow> moving = sweep(stride);
    const std::vector<WindowRow> equidistant = sweep(len);
    write_file_atomic(dir + "/windows_moving.csv", windows_to_csv(moving));
    write_file_atomic(dir + "/windows_equidistant.csv",
                      windows_to_csv(equidistant));
    if (cfg.at("plot").get<bool>())
        write_file_atomic(dir + "/windows.svg", windows_to_svg(moving));
    write_manifest(cfg, dir);
}

}  // namespace

json resolve_noise_options(const json& options) {
    return defaults_noise(options);
}

json resolve_spike_options(const json& options, std::uint64_t seed) {
    return defaults_spike(options, seed);
}

IDReport run_estimator(const DataMatrix& data, const json& noise_options,
                       const json& spike_options) {
    std::vector<std::string> extra;
    IDReport rep = estimate_with_noise(data, noise_options,
                                       spike_config(spike_options), &extra);
    for (const auto& w : extra) rep.warnings.push_back(w);
    return rep;
}

NoiseEstimate run_noise(const DataMatrix& data, const json& noise_options) {
    const std::string method = noise_options.at("method").get<std::string>();
    if (method == "none")
        throw ConfigError("noise method 'none' has nothing to estimate");
    return estimate_noise(data, noise_method_from_string(method),
                          noise_params(noise_options));
}

json resolve_config(const json& in) {
    if (!in.is_object()) throw ConfigError("config must be a JSON object");
    if (!in.contains("command")) throw ConfigError("config needs a 'command'");
    const std::string cmd = in.at("command").get<std::string>();
    const std::uint64_t seed =
        in.value("seed", static_cast<std::uint64_t>(1));

    json out;
    out["format_version"] = 1;
    out["command"] = cmd;
    out["seed"] = seed;

    auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
        for (auto it = in.begin(); it != in.end(); ++it) {
            bool ok = it.key() == "command" || it.key() == "seed" ||
                      it.key() == "format_version" || it.key() == "output_dir";
            for (const char* a : allowed) ok = ok || it.key() == a;
            if (!ok)
                throw ConfigError("unknown option '" + it.key() + "' for '" +
                                  cmd + "'");
        }
    };

    if (cmd == "simulate" || cmd == "compare") {
        out["sensors"] = in.value("sensors", 128);
        out["samples"] = in.value("samples", 1000L);
        out["trials"] = in.value("trials", 5);
        out["sample_period_ms"] = in.value("sample_period_ms", 1.0);
        json snrs = json::array();
        if (in.contains("snr")) {
            if (!in.at("snr").is_array())
                throw ConfigError("'snr' must be an array");
            for (const auto& s : in.at("snr")) snrs.push_back(snr_to_json(snr_from_json(s)));
        } else {
            snrs = {"inf", 1.0, 0.1, 0.01, 0.001, 0.0001};
        }
        if (snrs.empty()) throw ConfigError("'snr' list is empty");
        out["snr"] = snrs;
        if (cmd == "simulate") {
            out["data_format"] = in.value("data_format", "csv");
            format_from_string(out["data_format"].get<std::string>());
            reject_unknown({"sensors", "samples", "trials", "sample_period_ms",
                            "snr", "data_format"});
        } else {
            out["noise"] = defaults_noise(in.value("noise", json::object()));
            out["spike"] = defaults_spike(in.value("spike", json::object()), seed);
            reject_unknown({"sensors", "samples", "trials", "sample_period_ms",
                            "snr", "noise", "spike"});
        }
        return out;
    }
    if (cmd == "estimate" || cmd == "window") {
        if (!in.contains("input")) throw ConfigError("'" + cmd + "' needs 'input'");
        out["input"] = in.at("input").get<std::string>();
        out["format"] = in.value("format", "csv");
        format_from_string(out["format"].get<std::string>());
        out["sample_period_ms"] = in.value("sample_period_ms", 1.0);
        out["noise"] = defaults_noise(in.value("noise", json::object()));
        out["spike"] = defaults_spike(in.value("spike", json::object()), seed);
        if (cmd == "window") {
            out["window_ms"] = in.value("window_ms", 2000.0);
            out["stride_ms"] = in.value("stride_ms", 600.0);
            out["plot"] = in.value("plot", true);
            reject_unknown({"input", "format", "sample_period_ms", "noise",
                            "spike", "window_ms", "stride_ms", "plot"});
        } else {
            reject_unknown({"input", "format", "sample_period_ms", "noise",
                            "spike"});
        }
        return out;
    }
    throw ConfigError("unknown command '" + cmd +
                      "' (expected simulate, estimate, compare or window)");
}

void run_config(const json& config, const std::string& output_dir) {
    const json cfg = resolve_config(config);
    if (output_dir.empty()) throw ConfigError("output directory not set");
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec)
        throw DataError("cannot create output directory '" + output_dir +
                        "': " + ec.message());
    const std::string cmd = cfg.at("command").get<std::string>();
    if (cmd == "simulate") return run_simulate(cfg, output_dir);
    if (cmd == "estimate") return run_estimate(cfg, output_dir);
    if (cmd == "compare") return run_compare(cfg, output_dir);
    if (cmd == "window") return run_window(cfg, output_dir);
    throw ConfigError("unknown command '" + cmd + "'");
}

json load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("manifest '" + path + "' is not valid JSON: " +
                          e.what());
    }
    return j;
}

} // namespace spikedim
