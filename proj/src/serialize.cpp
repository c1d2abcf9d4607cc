#include "gearnet/serialize.hpp"

#include "gearnet/manifest.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace gearnet {

namespace {

constexpr std::string_view kMagic = "GSTK1";

void put_u32(std::string& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFFu));
}

void put_f64(std::string& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xFFu));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    bool done() const { return pos_ == bytes_.size(); }

    std::string_view take(std::size_t n, const char* what) {
        if (bytes_.size() - pos_ < n) throw FormatError(std::string("GSTK1: truncated ") + what);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::uint32_t u32(const char* what) {
        auto s = take(4, what);
        std::uint32_t v = 0;
        for (int k = 3; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(k)]);
        return v;
    }

    double f64(const char* what) {
        auto s = take(8, what);
        std::uint64_t bits = 0;
        for (int k = 7; k >= 0; --k) bits = (bits << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(k)]);
        return std::bit_cast<double>(bits);
    }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string encode_gstk(const NamedTensors& records) {
    std::string out(kMagic);
    for (const auto& [name, t] : records) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put_u32(out, static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
        for (double v : t.data()) put_f64(out, v);
    }
    return out;
}

NamedTensors decode_gstk(std::string_view bytes) {
    Reader in(bytes);
    if (in.take(kMagic.size(), "magic") != kMagic) throw FormatError("GSTK1: bad magic");
    NamedTensors records;
    while (!in.done()) {
        const auto name_len = in.u32("name length");
        std::string name(in.take(name_len, "name"));
        const auto rank = in.u32("rank");
        if (rank == 0) throw FormatError("GSTK1: record '" + name + "' has rank 0");
        Shape shape;
        std::size_t count = 1;
        for (std::uint32_t k = 0; k < rank; ++k) {
            shape.push_back(in.u32("dimension"));
            if (shape.back() == 0) throw FormatError("GSTK1: record '" + name + "' has a zero dimension");
            count *= shape.back();
        }
        std::vector<double> data(count);
        for (auto& v : data) v = in.f64("payload");
        records.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
    }
    return records;
}

void save_gstk(const std::filesystem::path& path, const NamedTensors& records) {
    write_file_atomic(path, encode_gstk(records));
}

NamedTensors load_gstk(const std::filesystem::path& path) { return decode_gstk(read_file(path)); }

Tensor text_record(std::string_view text) {
    std::vector<double> bytes;
    bytes.reserve(text.size() + 1);
    for (char ch : text) bytes.push_back(static_cast<double>(static_cast<unsigned char>(ch)));
    if (bytes.empty()) bytes.push_back(0.0);  // dimensions must be positive
    const std::size_t n = bytes.size();
    return Tensor({n}, std::move(bytes));
}

std::string text_from_record(const Tensor& record) {
    std::string text;
    for (double v : record.data()) {
        if (v == 0.0) continue;
        if (!(v >= 1.0 && v <= 255.0) || v != static_cast<double>(static_cast<int>(v))) {
            throw FormatError("GSTK1: text record holds a non-byte value");
        }
        text.push_back(static_cast<char>(static_cast<unsigned char>(v)));
    }
    return text;
}

}  // namespace gearnet
