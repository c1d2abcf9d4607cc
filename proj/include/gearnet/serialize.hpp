#pragma once

#include "gearnet/tensor.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gearnet {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

/// GSTK1 container: the magic "GSTK1", then per record a u32 name length,
/// the UTF-8 name, a u32 rank, u32 dims and row-major f64 payload. Every
/// integer and double is little-endian.
std::string encode_gstk(const NamedTensors& records);
NamedTensors decode_gstk(std::string_view bytes);

void save_gstk(const std::filesystem::path& path, const NamedTensors& records);
NamedTensors load_gstk(const std::filesystem::path& path);

/// Text carried inside a rank-1 record, one double per byte.
Tensor text_record(std::string_view text);
std::string text_from_record(const Tensor& record);

}  // namespace gearnet
