#include "gearnet/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace gearnet {

DataError::DataError(const std::string& message, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

std::size_t gear_to_class(int gear) {
    if (gear == kGearLow) return 0;
    if (gear == kGearHigh) return 1;
    throw DataError("unknown gear " + std::to_string(gear));
}

int class_to_gear(std::size_t label) {
    if (label > 1) throw DataError("unknown class index " + std::to_string(label));
    return label == 0 ? kGearLow : kGearHigh;
}

namespace {

constexpr std::string_view kHeader = "t,ax,ay,az,gear";

template <typename T>
T parse_field(std::string_view field, const char* name, std::size_t line) {
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw DataError("malformed " + std::string(name) + " field '" + std::string(field) + "'", line);
    }
    return value;
}

void append_real(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

}  // namespace

std::vector<Record> parse_csv(std::string_view text) {
    std::vector<Record> records;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!header_seen) {
            if (line != kHeader) throw DataError("expected header '" + std::string(kHeader) + "'", line_no);
            header_seen = true;
            continue;
        }
        if (line.empty()) {
            if (text.empty()) break;
            throw DataError("empty row", line_no);
        }
        std::string_view fields[5];
        std::size_t n = 0;
        while (true) {
            const auto comma = line.find(',');
            if (n == 5) throw DataError("too many fields", line_no);
            fields[n++] = line.substr(0, comma);
            if (comma == std::string_view::npos) break;
            line = line.substr(comma + 1);
        }
        if (n != 5) throw DataError("expected 5 fields, got " + std::to_string(n), line_no);

        Record r;
        r.t = parse_field<std::int64_t>(fields[0], "t", line_no);
        r.ax = parse_field<double>(fields[1], "ax", line_no);
        r.ay = parse_field<double>(fields[2], "ay", line_no);
        r.az = parse_field<double>(fields[3], "az", line_no);
        r.gear = parse_field<int>(fields[4], "gear", line_no);
        if (!std::isfinite(r.ax) || !std::isfinite(r.ay) || !std::isfinite(r.az)) {
            throw DataError("non-finite acceleration", line_no);
        }
        if (r.gear != kGearLow && r.gear != kGearHigh) {
            throw DataError("unknown gear value " + std::to_string(r.gear), line_no);
        }
        if (!records.empty() && r.t <= records.back().t) {
            throw DataError("t is not strictly increasing", line_no);
        }
        records.push_back(r);
    }
    if (!header_seen) throw DataError("empty file");
    if (records.empty()) throw DataError("file has a header but no records");
    return records;
}

std::vector<Record> load_csv(const std::filesystem::path& path) {
    try {
        return parse_csv(read_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what(), e.line());
    }
}

std::string format_csv(std::span<const Record> records) {
    std::string out(kHeader);
    out.push_back('\n');
    out.reserve(records.size() * 64);
    for (const auto& r : records) {
        out += std::to_string(r.t);
        out.push_back(',');
        append_real(out, r.ax);
        out.push_back(',');
        append_real(out, r.ay);
        out.push_back(',');
        append_real(out, r.az);
        out.push_back(',');
        out += std::to_string(r.gear);
        out.push_back('\n');
    }
    return out;
}

void save_csv(const std::filesystem::path& path, std::span<const Record> records) {
    write_file_atomic(path, format_csv(records));
}

std::size_t window_count(std::size_t n, std::size_t window, std::size_t step) {
    if (window == 0 || step == 0 || step > window) throw std::invalid_argument("need window >= step >= 1");
    return n < window ? 0 : (n - window) / step + 1;
}

std::vector<Window> segment(std::span<const Record> records, std::size_t window, std::size_t step,
                            SegmentStats* stats) {
    const std::size_t count = window_count(records.size(), window, step);
    std::vector<Window> out;
    out.reserve(count);
    SegmentStats local;
    local.candidates = count;
    for (std::size_t w = 0; w < count; ++w) {
        const std::size_t start = w * step;
        std::size_t high = 0;
        Tensor samples({window, 3});
        for (std::size_t k = 0; k < window; ++k) {
            const Record& r = records[start + k];
            samples(k, 0) = r.ax;
            samples(k, 1) = r.ay;
            samples(k, 2) = r.az;
            high += gear_to_class(r.gear);
        }
        if (2 * high == window) {
            ++local.ties;
            continue;
        }
        out.push_back({std::move(samples), 2 * high > window ? 1u : 0u, start});
    }
    if (stats) *stats = local;
    return out;
}

WindowedDataset split(std::vector<Window> windows, SplitRatios ratios) {
    const double sum = ratios.train + ratios.validation + ratios.test;
    if (!(ratios.train > 0.0 && ratios.validation > 0.0 && ratios.test > 0.0) || std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("split ratios must be positive and sum to 1");
    }
    const std::size_t n = windows.size();
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.train + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.validation + 1e-9));

    WindowedDataset ds;
    std::vector<Window>* parts[3] = {&ds.train, &ds.validation, &ds.test};
    const std::size_t bounds[4] = {0, n_train, std::min(n, n_train + n_val), n};
    std::size_t previous_end = 0;  // one past the last sample index used by the previous partition
    for (std::size_t p = 0; p < 3; ++p) {
        std::size_t last_end = previous_end;
        for (std::size_t k = bounds[p]; k < bounds[p + 1]; ++k) {
            Window& w = windows[k];
            if (p > 0 && w.start < previous_end) continue;
            last_end = w.start + w.length();
            parts[p]->push_back(std::move(w));
        }
        previous_end = last_end;
    }
    if (ds.train.empty() || ds.validation.empty() || ds.test.empty()) {
        throw std::invalid_argument("split leaves an empty partition (" + std::to_string(n) + " windows)");
    }
    return ds;
}

ChannelStats channel_stats(std::span<const Window> windows) {
    ChannelStats s;
    std::array<double, 3> sum{}, sq{};
    std::size_t count = 0;
    for (const auto& w : windows) {
        for (std::size_t t = 0; t < w.length(); ++t)
            for (std::size_t c = 0; c < 3; ++c) sum[c] += w.samples(t, c);
        count += w.length();
    }
    if (count == 0) throw std::invalid_argument("channel statistics need at least one window");
    for (std::size_t c = 0; c < 3; ++c) s.mean[c] = sum[c] / static_cast<double>(count);
    for (const auto& w : windows)
        for (std::size_t t = 0; t < w.length(); ++t)
            for (std::size_t c = 0; c < 3; ++c) {
                const double d = w.samples(t, c) - s.mean[c];
                sq[c] += d * d;
            }
    for (std::size_t c = 0; c < 3; ++c) s.std[c] = std::max(std::sqrt(sq[c] / static_cast<double>(count)), 1e-8);
    return s;
}

void apply_stats(std::span<Window> windows, const ChannelStats& stats) {
    for (auto& w : windows)
        for (std::size_t t = 0; t < w.length(); ++t)
            for (std::size_t c = 0; c < 3; ++c) w.samples(t, c) = (w.samples(t, c) - stats.mean[c]) / stats.std[c];
}

WindowedDataset normalize(WindowedDataset ds) {
    if (ds.train.empty()) throw std::invalid_argument("normalize: training partition is empty");
    ds.stats = channel_stats(ds.train);
    apply_stats(ds.train, ds.stats);
    apply_stats(ds.validation, ds.stats);
    apply_stats(ds.test, ds.stats);
    ds.normalized = true;
    return ds;
}

Tensor stack_windows(std::span<const Window> windows, std::span<const std::size_t> indices) {
    if (indices.empty()) throw std::invalid_argument("cannot stack an empty selection of windows");
    const Shape& shape = windows[indices[0]].samples.shape();
    Tensor batch({indices.size(), shape[0], shape[1]});
    const std::size_t stride = shape[0] * shape[1];
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const Tensor& s = windows[indices[b]].samples;
        if (s.shape() != shape) throw ShapeError("windows differ in shape");
        std::copy_n(s.ptr(), stride, batch.ptr() + b * stride);
    }
    return batch;
}

Tensor stack_windows(std::span<const Window> windows) {
    std::vector<std::size_t> all(windows.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    return stack_windows(windows, all);
}

WindowedDataset prepare_dataset(std::span<const Record> records, SplitRatios ratios) {
    return normalize(split(segment(records), ratios));
}

KeyValues dataset_summary(const WindowedDataset& ds) {
    auto balance = [](const std::vector<Window>& ws) {
        std::size_t high = 0;
        for (const auto& w : ws) high += w.label;
        return std::to_string(ws.size() - high) + "/" + std::to_string(high);
    };
    KeyValues kv{{"windows.train", std::to_string(ds.train.size())},
                 {"windows.validation", std::to_string(ds.validation.size())},
                 {"windows.test", std::to_string(ds.test.size())},
                 {"labels.train", balance(ds.train)},
                 {"labels.validation", balance(ds.validation)},
                 {"labels.test", balance(ds.test)}};
    for (std::size_t c = 0; c < 3; ++c) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", ds.stats.mean[c]);
        kv.emplace_back("stats.mean." + std::to_string(c), buf);
        std::snprintf(buf, sizeof buf, "%.17g", ds.stats.std[c]);
        kv.emplace_back("stats.std." + std::to_string(c), buf);
    }
    return kv;
}

}  // namespace gearnet
