#pragma once

#include <stdexcept>
#include <string>

namespace spikedim {

// Error categories map 1:1 onto process exit codes (see tools/main.cpp):
//   2 = bad or degenerate input data, 3 = model/numerical failure,
//   4 = configuration error.
struct Error : std::runtime_error {
    int code;
    Error(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(2, msg) {}
};

struct ModelError : Error {
    explicit ModelError(const std::string& msg) : Error(3, msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(4, msg) {}
};

} // namespace spikedim
