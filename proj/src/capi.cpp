#include "spikedim.h"

#include <cstring>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>

#include <json.hpp>

#include "baselines.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "run.hpp"
#include "spike.hpp"

using nlohmann::json;

struct sd_data {
    spikedim::DataMatrix matrix;
};

struct sd_report {
    spikedim::IDReport report;
};

namespace {

thread_local std::string g_error;
thread_local int g_code = SD_OK;

void clear_error() {
    g_error.clear();
    g_code = SD_OK;
}

int record(const std::exception& e, int code) {
    g_error = e.what();
    g_code = code;
    return code;
}

// Runs f, translating exceptions into the thread-local error slot.  fail is
// what the wrapper returns when f throws.
template <typename F, typename R>
R guarded(R fail, F&& f) {
    clear_error();
    try {
        return f();
    } catch (const spikedim::Error& e) {
        record(e, e.code);
    } catch (const json::exception& e) {
        record(e, SD_ERR_CONFIG);
    } catch (const std::exception& e) {
        record(e, SD_ERR_DATA);
    }
    return fail;
}

// Same, for functions whose return value is the status code itself.
template <typename F>
int guarded_status(F&& f) {
    clear_error();
    try {
        f();
        return SD_OK;
    } catch (const spikedim::Error& e) {
        return record(e, e.code);
    } catch (const json::exception& e) {
        return record(e, SD_ERR_CONFIG);
    } catch (const std::exception& e) {
        return record(e, SD_ERR_DATA);
    }
}

json parse_options(const char* options_json) {
    if (options_json == nullptr || options_json[0] == '\0') return json::object();
    json j;
    try {
        j = json::parse(options_json);
    } catch (const json::exception& e) {
        throw spikedim::ConfigError(std::string("options are not valid JSON: ") +
                                    e.what());
    }
    if (!j.is_object()) throw spikedim::ConfigError("options must be a JSON object");
    return j;
}

const double* check_spectrum(const double* eigenvalues, int64_t k) {
    if (eigenvalues == nullptr)
        throw spikedim::ConfigError("eigenvalues must not be NULL");
    if (k < 1) throw spikedim::ConfigError("spectrum length must be positive");
    return eigenvalues;
}

Eigen::VectorXd to_vector(const double* values, int64_t k) {
    return Eigen::Map<const Eigen::VectorXd>(check_spectrum(values, k), k);
}

const spikedim::IDReport& rep(const sd_report* r) {
    if (r == nullptr) throw spikedim::ConfigError("report handle is NULL");
    return r->report;
}

const spikedim::DataMatrix& mat(const sd_data* d) {
    if (d == nullptr) throw spikedim::ConfigError("data handle is NULL");
    return d->matrix;
}

int check_group(const spikedim::IDReport& r, int group) {
    if (group < 0 || group >= r.L)
        throw spikedim::ConfigError("group index " + std::to_string(group) +
                                    " out of range (L = " + std::to_string(r.L) +
                                    ")");
    return group;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

extern "C" {

const char* sd_version(void) { return "1.0.0"; }

const char* sd_last_error(void) { return g_error.c_str(); }

int sd_last_error_code(void) { return g_code; }

sd_data* sd_data_create(int64_t channels, int64_t samples,
                        const double* values, double period_ms) {
    return guarded<>(static_cast<sd_data*>(nullptr), [&] {
        if (values == nullptr)
            throw spikedim::ConfigError("values must not be NULL");
        if (channels < 1 || samples < 1)
            throw spikedim::ConfigError("channels and samples must be positive");
        Eigen::MatrixXd m = Eigen::Map<const Eigen::Matrix<
            double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            values, channels, samples);
        return new sd_data{spikedim::DataMatrix(std::move(m), period_ms)};
    });
}

sd_data* sd_data_read(const char* path, const char* format) {
    return guarded<>(static_cast<sd_data*>(nullptr), [&] {
        if (path == nullptr || format == nullptr)
            throw spikedim::ConfigError("path and format must not be NULL");
        return new sd_data{
            spikedim::read_data(path, spikedim::format_from_string(format))};
    });
}

int sd_data_write(const sd_data* data, const char* path, const char* format) {
    return guarded_status([&] {
        if (path == nullptr || format == nullptr)
            throw spikedim::ConfigError("path and format must not be NULL");
        spikedim::write_data(mat(data), path,
                             spikedim::format_from_string(format));
    });
}

int64_t sd_data_channels(const sd_data* data) {
    return guarded<>(static_cast<int64_t>(-1),
                     [&] { return static_cast<int64_t>(mat(data).channels()); });
}

int64_t sd_data_samples(const sd_data* data) {
    return guarded<>(static_cast<int64_t>(-1),
                     [&] { return static_cast<int64_t>(mat(data).samples()); });
}

int sd_data_values(const sd_data* data, double* out) {
    return guarded_status([&] {
        if (out == nullptr) throw spikedim::ConfigError("out must not be NULL");
        const Eigen::MatrixXd& m = mat(data).values;
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>(out, m.rows(), m.cols()) = m;
    });
}

void sd_data_free(sd_data* data) { delete data; }

sd_report* sd_estimate(const sd_data* data, const char* options_json) {
    return guarded<>(static_cast<sd_report*>(nullptr), [&] {
        const spikedim::DataMatrix& m = mat(data);
        json opts = parse_options(options_json);
        for (auto it = opts.begin(); it != opts.end(); ++it)
            if (it.key() != "noise" && it.key() != "spike" && it.key() != "seed")
                throw spikedim::ConfigError("unknown option '" + it.key() + "'");
        const auto seed = opts.value("seed", static_cast<std::uint64_t>(1));
        json noise =
            spikedim::resolve_noise_options(opts.value("noise", json::object()));
        json spike = spikedim::resolve_spike_options(
            opts.value("spike", json::object()), seed);
        return new sd_report{spikedim::run_estimator(m, noise, spike)};
    });
}

int sd_report_id(const sd_report* report) {
    return guarded<>(-1, [&] { return rep(report).L; });
}

double sd_report_spike(const sd_report* report, int group) {
    return guarded<>(kNaN, [&] {
        const auto& r = rep(report);
        return r.estimated_spikes[check_group(r, group)];
    });
}

int sd_report_group_size(const sd_report* report, int group) {
    return guarded<>(-1, [&] {
        const auto& r = rep(report);
        return static_cast<int>(r.groups[check_group(r, group)].size());
    });
}

double sd_report_group_mean(const sd_report* report, int group) {
    return guarded<>(kNaN, [&] {
        const auto& r = rep(report);
        return r.group_means[check_group(r, group)];
    });
}

double sd_report_bulk(const sd_report* report) {
    return guarded<>(kNaN, [&] { return rep(report).bulk_estimate; });
}

double sd_report_gamma(const sd_report* report) {
    return guarded<>(kNaN, [&] { return rep(report).gamma_T; });
}

double sd_report_delta(const sd_report* report) {
    return guarded<>(kNaN, [&] { return rep(report).thresholds.delta; });
}

double sd_report_epsilon(const sd_report* report) {
    return guarded<>(kNaN, [&] { return rep(report).thresholds.epsilon; });
}

double sd_report_epsilon0(const sd_report* report) {
    return guarded<>(kNaN, [&] { return rep(report).thresholds.epsilon0; });
}

double sd_report_epsilon_prime(const sd_report* report) {
    return guarded<>(kNaN, [&] { return rep(report).thresholds.epsilon_prime; });
}

int64_t sd_report_eigenvalue_count(const sd_report* report) {
    return guarded<>(static_cast<int64_t>(-1), [&] {
        return static_cast<int64_t>(rep(report).sample_eigenvalues.size());
    });
}

double sd_report_eigenvalue(const sd_report* report, int64_t rank) {
    return guarded<>(kNaN, [&] {
        const auto& eigs = rep(report).sample_eigenvalues;
        if (rank < 0 || rank >= eigs.size())
            throw spikedim::ConfigError("eigenvalue rank out of range");
        return eigs[rank];
    });
}

int sd_report_warning_count(const sd_report* report) {
    return guarded<>(-1, [&] {
        return static_cast<int>(rep(report).warnings.size());
    });
}

const char* sd_report_warning(const sd_report* report, int index) {
    return guarded<>(static_cast<const char*>(nullptr), [&]() -> const char* {
        const auto& warnings = rep(report).warnings;
        if (index < 0 || index >= static_cast<int>(warnings.size()))
            throw spikedim::ConfigError("warning index out of range");
        return warnings[static_cast<size_t>(index)].c_str();
    });
}

void sd_report_free(sd_report* report) { delete report; }

int sd_mp_edges(double gamma, double sigma2, double* lower, double* upper) {
    return guarded_status([&] {
        if (lower == nullptr || upper == nullptr)
            throw spikedim::ConfigError("lower and upper must not be NULL");
        const auto [a, b] = spikedim::mp_edges(gamma, sigma2);
        *lower = a;
        *upper = b;
    });
}

int sd_aic_argmin(const double* eigenvalues, int64_t k, int64_t t) {
    return guarded<>(-1, [&] {
        return spikedim::aic_count(to_vector(eigenvalues, k), t).argmin_or_count;
    });
}

int sd_mdl_argmin(const double* eigenvalues, int64_t k, int64_t t) {
    return guarded<>(-1, [&] {
        return spikedim::mdl_count(to_vector(eigenvalues, k), t).argmin_or_count;
    });
}

int sd_eif_argmin(const double* eigenvalues, int64_t k, int64_t t) {
    return guarded<>(-1, [&] {
        return spikedim::eif_count(to_vector(eigenvalues, k), t).argmin_or_count;
    });
}

int sd_pca_count(const double* eigenvalues, int64_t k, double fraction) {
    return guarded<>(-1, [&] {
        return spikedim::pca_count(to_vector(eigenvalues, k), fraction)
            .argmin_or_count;
    });
}

int sd_noise_variances(const sd_data* data, const char* method,
                       const char* options_json, double* out) {
    return guarded_status([&] {
        if (method == nullptr)
            throw spikedim::ConfigError("method must not be NULL");
        if (out == nullptr) throw spikedim::ConfigError("out must not be NULL");
        json opts = parse_options(options_json);
        opts["method"] = method;
        const spikedim::NoiseEstimate est =
            spikedim::run_noise(mat(data), spikedim::resolve_noise_options(opts));
        Eigen::Map<Eigen::VectorXd>(out, est.channel_variances.size()) =
            est.channel_variances;
    });
}

int sd_run(const char* config_json, const char* output_dir) {
    return guarded_status([&] {
        if (config_json == nullptr || output_dir == nullptr)
            throw spikedim::ConfigError(
                "config and output directory must not be NULL");
        json cfg;
        try {
            cfg = json::parse(config_json);
        } catch (const json::exception& e) {
            throw spikedim::ConfigError(
                std::string("config is not valid JSON: ") + e.what());
        }
        spikedim::run_config(cfg, output_dir);
    });
}

int sd_rerun(const char* manifest_path, const char* output_dir) {
    return guarded_status([&] {
        if (manifest_path == nullptr)
            throw spikedim::ConfigError("manifest path must not be NULL");
        const json cfg = spikedim::load_manifest(manifest_path);
        std::string dir;
        if (output_dir != nullptr && output_dir[0] != '\0') {
            dir = output_dir;
        } else {
            dir = std::filesystem::path(manifest_path).parent_path().string();
            if (dir.empty()) dir = ".";
        }
        spikedim::run_config(cfg, dir);
    });
}

} // extern "C"
