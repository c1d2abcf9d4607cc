#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gearnet {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// 64-bit FNV-1a digest rendered as 16 hex digits.
std::string checksum(std::string_view bytes);
std::string file_checksum(const std::filesystem::path& path);

/// Ordered key=value lines; keys may repeat only if the caller allows it.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string format_key_values(const KeyValues& kv);
/// Parses key=value lines, skipping blanks and '#' comments.
KeyValues parse_key_values(std::string_view text);
std::map<std::string, std::string> to_map(const KeyValues& kv);

struct RunManifest {
    std::string command;
    KeyValues configuration;
    std::uint64_t seed = 0;
    KeyValues inputs;
    KeyValues outputs;  // label -> path; checksums are added on write
    double wall_seconds = 0.0;

    /// Adds a checksum for every output path and writes `path` atomically.
    void write(const std::filesystem::path& path) const;
};

}  // namespace gearnet
