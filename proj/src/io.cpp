#include "io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace spikedim {

DataFormat format_from_string(std::string_view s) {
    if (s == "csv") return DataFormat::Csv;
    if (s == "raw-f64") return DataFormat::RawF64;
    throw ConfigError("unknown data format '" + std::string(s) +
                      "' (expected csv or raw-f64)");
}

const char* format_to_string(DataFormat f) {
    return f == DataFormat::Csv ? "csv" : "raw-f64";
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open '" + tmp + "' for writing");
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw DataError("cannot rename '" + tmp + "' to '" + path + "'");
}

namespace {

constexpr char kMagic[4] = {'S', 'P', 'K', 'C'};

bool parse_cell(std::string_view cell, double& out) {
    const char* b = cell.data();
    const char* e = b + cell.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
    if (b == e) return false;
    const auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

DataMatrix read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    long lineno = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        std::vector<double> row;
        row.reserve(cells.size());
        bool ok = true;
        size_t bad_col = 0;
        for (size_t c = 0; c < cells.size(); ++c) {
            double v;
            if (!parse_cell(cells[c], v)) {
                ok = false;
                bad_col = c;
                break;
            }
            row.push_back(v);
        }
        if (!ok) {
            // a single non-numeric first line is treated as a header
            if (header_allowed && rows.empty()) {
                header_allowed = false;
                continue;
            }
            throw DataError("'" + path + "': non-numeric cell at row " +
                            std::to_string(lineno) + ", column " +
                            std::to_string(bad_col + 1));
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError("'" + path + "': row " + std::to_string(lineno) +
                            " has " + std::to_string(row.size()) +
                            " columns, expected " +
                            std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
        header_allowed = false;
    }
    if (rows.empty()) throw DataError("'" + path + "': no data rows");
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(rows.front().size()));
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c)
            values(static_cast<Eigen::Index>(r),
                   static_cast<Eigen::Index>(c)) = rows[r][c];
    return DataMatrix(std::move(values));
}

DataMatrix read_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    char magic[4];
    std::uint32_t K = 0, T = 0, reserved = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&K), 4);
    in.read(reinterpret_cast<char*>(&T), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("'" + path + "': missing SPKC header");
    const std::uint64_t expected = static_cast<std::uint64_t>(K) * T;
    std::vector<double> buf(expected);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(expected * sizeof(double)));
    const std::uint64_t got =
        static_cast<std::uint64_t>(std::max<std::streamsize>(in.gcount(), 0)) /
        sizeof(double);
    if (got != expected)
        throw DataError("'" + path + "': truncated payload, expected " +
                        std::to_string(expected) + " doubles, found " +
                        std::to_string(got));
    Eigen::MatrixXd values(K, T);
    for (std::uint32_t r = 0; r < K; ++r)
        for (std::uint32_t c = 0; c < T; ++c)
            values(r, c) = buf[static_cast<std::uint64_t>(r) * T + c];
    return DataMatrix(std::move(values));
}

}  // namespace

DataMatrix read_data(const std::string& path, DataFormat format) {
    return format == DataFormat::Csv ? read_csv(path) : read_raw(path);
}

void write_data(const DataMatrix& data, const std::string& path,
                DataFormat format) {
    const auto K = data.channels();
    const auto T = data.samples();
    if (format == DataFormat::Csv) {
        std::string out;
        out.reserve(static_cast<size_t>(K * T) * 20);
        for (Eigen::Index r = 0; r < K; ++r) {
            for (Eigen::Index c = 0; c < T; ++c) {
                if (c) out += ',';
                out += format_double(data.values(r, c));
            }
            out += '\n';
        }
        write_file_atomic(path, out);
        return;
    }
    std::string out;
    out.append(kMagic, 4);
    const std::uint32_t k32 = static_cast<std::uint32_t>(K);
    const std::uint32_t t32 = static_cast<std::uint32_t>(T);
    const std::uint32_t reserved = 0;
    out.append(reinterpret_cast<const char*>(&k32), 4);
    out.append(reinterpret_cast<const char*>(&t32), 4);
    out.append(reinterpret_cast<const char*>(&reserved), 4);
    for (Eigen::Index r = 0; r < K; ++r)
        for (Eigen::Index c = 0; c < T; ++c) {
            const double v = data.values(r, c);
            out.append(reinterpret_cast<const char*>(&v), sizeof(double));
        }
    write_file_atomic(path, out);
}

std::string report_to_keyvalue(const IDReport& rep, long K, long T,
                               const std::string& noise_method) {
    std::ostringstream os;
    os << "K = " << K << '\n';
    os << "T = " << T << '\n';
    os << "noise_method = " << noise_method << '\n';
    os << "L = " << rep.L << '\n';
    os << "gamma_T = " << format_double(rep.gamma_T) << '\n';
    os << "bulk_estimate = " << format_double(rep.bulk_estimate) << '\n';
    os << "delta = " << format_double(rep.thresholds.delta) << '\n';
    os << "epsilon = " << format_double(rep.thresholds.epsilon) << '\n';
    os << "epsilon0 = " << format_double(rep.thresholds.epsilon0) << '\n';
    os << "epsilon_prime = " << format_double(rep.thresholds.epsilon_prime)
       << '\n';
    for (int l = 0; l < rep.L; ++l) {
        const int idx = l + 1;
        os << "spike_" << idx << " = "
           << format_double(rep.estimated_spikes[l]) << '\n';
        os << "group_size_" << idx << " = " << rep.groups[l].size() << '\n';
        os << "group_mean_" << idx << " = "
           << format_double(rep.group_means[l]) << '\n';
    }
    os << "epsilon_candidates = " << rep.epsilon_grid.size() << '\n';
    for (size_t j = 0; j < rep.epsilon_grid.size(); ++j) {
        os << "epsilon_candidate_" << (j + 1) << " = "
           << format_double(rep.epsilon_grid[j]) << '\n';
        os << "discrepancy_" << (j + 1) << " = "
           << format_double(rep.discrepancy_trace[j]) << '\n';
    }
    os << "warning_count = " << rep.warnings.size() << '\n';
    for (size_t w = 0; w < rep.warnings.size(); ++w)
        os << "warning_" << (w + 1) << " = " << rep.warnings[w] << '\n';
    return os.str();
}

std::string report_to_csv(const IDReport& rep) {
    std::string out = "rank,sample_eigenvalue,group,estimated_spike\n";
    const auto K = rep.sample_eigenvalues.size();
    for (Eigen::Index i = 0; i < K; ++i) {
        int group = 0;
        double spike = 0.0;
        bool spiked = false;
        for (size_t l = 0; l < rep.groups.size(); ++l)
            if (i >= rep.groups[l].begin && i < rep.groups[l].end) {
                group = static_cast<int>(l) + 1;
                spike = rep.estimated_spikes[l];
                spiked = true;
            }
        out += std::to_string(i + 1);
        out += ',';
        out += format_double(rep.sample_eigenvalues[i]);
        out += ',';
        out += std::to_string(group);
        out += ',';
        if (spiked) out += format_double(spike);
        out += '\n';
    }
    return out;
}

namespace {

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

struct SvgAxes {
    double x0 = 60, y0 = 20, w = 600, h = 380;  // plot box in px
    double xmin, xmax, ymin, ymax;
    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
    double py(double y) const { return y0 + (ymax - y) / (ymax - ymin) * h; }
};

void svg_open(std::ostringstream& os, const SvgAxes& a, const char* xlabel,
              const char* ylabel) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"700\" "
          "height=\"460\" viewBox=\"0 0 700 460\">\n";
    os << "<rect x=\"" << svg_num(a.x0) << "\" y=\"" << svg_num(a.y0)
       << "\" width=\"" << svg_num(a.w) << "\" height=\"" << svg_num(a.h)
       << "\" fill=\"white\" stroke=\"black\"/>\n";
    os << "<text x=\"" << svg_num(a.x0 + a.w / 2) << "\" y=\"450\" "
          "text-anchor=\"middle\" font-size=\"14\">"
       << xlabel << "</text>\n";
    os << "<text x=\"15\" y=\"" << svg_num(a.y0 + a.h / 2)
       << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 "
          "15 "
       << svg_num(a.y0 + a.h / 2) << ")\">" << ylabel << "</text>\n";
}

}  // namespace

std::string report_to_svg(const IDReport& rep) {
    const auto K = rep.sample_eigenvalues.size();
    SvgAxes a;
    a.xmin = 0.5;
    a.xmax = static_cast<double>(K) + 0.5;
    a.ymin = std::min(0.0, rep.sample_eigenvalues.minCoeff());
    a.ymax = rep.sample_eigenvalues.maxCoeff();
    for (double s : rep.estimated_spikes) a.ymax = std::max(a.ymax, s);
    if (!(a.ymax > a.ymin)) a.ymax = a.ymin + 1.0;
    a.ymax *= 1.05;

    std::ostringstream os;
    svg_open(os, a, "rank", "eigenvalue");
    const double dy = a.py(rep.thresholds.delta);
    if (rep.thresholds.delta >= a.ymin && rep.thresholds.delta <= a.ymax)
        os << "<line x1=\"" << svg_num(a.x0) << "\" y1=\"" << svg_num(dy)
           << "\" x2=\"" << svg_num(a.x0 + a.w) << "\" y2=\"" << svg_num(dy)
           << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    for (Eigen::Index i = 0; i < K; ++i)
        os << "<circle cx=\"" << svg_num(a.px(static_cast<double>(i) + 1.0))
           << "\" cy=\"" << svg_num(a.py(rep.sample_eigenvalues[i]))
           << "\" r=\"3\" fill=\"none\" stroke=\"black\"/>\n";
    for (size_t l = 0; l < rep.groups.size(); ++l) {
        const double cx = a.px(rep.groups[l].begin + 1.0);
        const double cy = a.py(rep.estimated_spikes[l]);
        os << "<path d=\"M " << svg_num(cx - 4) << ' ' << svg_num(cy - 4)
           << " L " << svg_num(cx + 4) << ' ' << svg_num(cy + 4) << " M "
           << svg_num(cx - 4) << ' ' << svg_num(cy + 4) << " L "
           << svg_num(cx + 4) << ' ' << svg_num(cy - 4)
           << "\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string windows_to_csv(const std::vector<WindowRow>& rows) {
    std::string out = "t_start_ms,t_end_ms,L\n";
    for (const auto& r : rows) {
        out += format_double(r.t_start_ms);
        out += ',';
        out += format_double(r.t_end_ms);
        out += ',';
        out += std::to_string(r.L);
        out += '\n';
    }
    return out;
}

std::string windows_to_svg(const std::vector<WindowRow>& rows) {
    SvgAxes a;
    a.xmin = rows.empty() ? 0.0 : rows.front().t_start_ms;
    a.xmax = rows.empty() ? 1.0 : rows.back().t_end_ms;
    int lmax = 1;
    for (const auto& r : rows) lmax = std::max(lmax, r.L);
    a.ymin = -0.5;
    a.ymax = lmax + 0.5;
    std::ostringstream os;
    svg_open(os, a, "time (ms)", "estimated sources");
    for (size_t i = 0; i < rows.size(); ++i) {
        const double y = a.py(rows[i].L);
        os << "<line x1=\"" << svg_num(a.px(rows[i].t_start_ms)) << "\" y1=\""
           << svg_num(y) << "\" x2=\"" << svg_num(a.px(rows[i].t_end_ms))
           << "\" y2=\"" << svg_num(y)
           << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        if (i > 0 && rows[i - 1].L != rows[i].L) {
            const double x = a.px(rows[i].t_start_ms);
            os << "<line x1=\"" << svg_num(x) << "\" y1=\""
               << svg_num(a.py(rows[i - 1].L)) << "\" x2=\"" << svg_num(x)
               << "\" y2=\"" << svg_num(y)
               << "\" stroke=\"black\" stroke-width=\"1\" "
                  "stroke-dasharray=\"2 2\"/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace spikedim
