// Error taxonomy mapped to process exit codes by the CLI.
#pragma once

#include <stdexcept>
#include <string>

namespace citymine {

// Invalid configuration or command line (exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or malformed input data (exit code 3).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failure inside a pipeline stage (exit code 4).
struct StageError : std::runtime_error {
    StageError(const std::string& stage, const std::string& msg)
        : std::runtime_error("stage '" + stage + "': " + msg), stage_name(stage) {}
    std::string stage_name;
};

} // namespace citymine
