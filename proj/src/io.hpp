#pragma once

#include <string>
#include <vector>

#include "core.hpp"
#include "spike.hpp"

namespace spikedim {

enum class DataFormat { Csv, RawF64 };

DataFormat format_from_string(std::string_view s);
const char* format_to_string(DataFormat f);

// CSV: one row per channel, numeric cells, optional single header line.
// raw-f64: 16-byte header (magic "SPKC", u32 K, u32 T, 4 reserved zero
// bytes, all little-endian) followed by K*T row-major little-endian doubles.
DataMatrix read_data(const std::string& path, DataFormat format);
void write_data(const DataMatrix& data, const std::string& path,
                DataFormat format);

// All file output goes through a temp file + rename.
void write_file_atomic(const std::string& path, const std::string& content);

std::string format_double(double v);  // %.17g, round-trip exact

// One `key = value` per line.
std::string report_to_keyvalue(const IDReport& rep, long K, long T,
                               const std::string& noise_method);

// rank, sample eigenvalue, group id (0 = bulk), estimated spike (empty for
// bulk rows).
std::string report_to_csv(const IDReport& rep);

// Scatter of the sample spectrum (circles) with estimated population spikes
// overlaid (crosses) and the delta cut as a horizontal line.
std::string report_to_svg(const IDReport& rep);

struct WindowRow {
    double t_start_ms = 0.0;
    double t_end_ms = 0.0;
    int L = 0;
};

std::string windows_to_csv(const std::vector<WindowRow>& rows);
std::string windows_to_svg(const std::vector<WindowRow>& rows);

} // namespace spikedim
