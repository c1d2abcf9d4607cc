#pragma once

#include "gearnet/manifest.hpp"
#include "gearnet/tensor.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gearnet {

/// One accelerometer sample on the uniform 50 Hz grid.
struct Record {
    std::int64_t t = 0;
    double ax = 0.0;  // horizontal
    double ay = 0.0;  // up
    double az = 0.0;  // forward
    int gear = 2;

    friend bool operator==(const Record&, const Record&) = default;
};

inline constexpr int kGearLow = 2;
inline constexpr int kGearHigh = 3;

/// Class index of a gear: gear 2 -> 0, gear 3 -> 1.
std::size_t gear_to_class(int gear);
int class_to_gear(std::size_t label);

class DataError : public std::runtime_error {
public:
    DataError(const std::string& message, std::size_t line = 0);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Parses `t,ax,ay,az,gear` CSV text; t must be strictly increasing.
std::vector<Record> parse_csv(std::string_view text);
std::vector<Record> load_csv(const std::filesystem::path& path);

/// Shortest round-trip formatting of every real, LF line endings.
std::string format_csv(std::span<const Record> records);
void save_csv(const std::filesystem::path& path, std::span<const Record> records);

struct Window {
    Tensor samples;           // [window x 3]
    std::size_t label = 0;    // class index
    std::size_t start = 0;    // index of the first record in the source stream

    std::size_t length() const { return samples.dim(0); }
};

struct SegmentStats {
    std::size_t candidates = 0;  // windows enumerated before labelling
    std::size_t ties = 0;        // dropped because no gear held a majority
};

/// Windows starting at 0, step, 2·step, ...; each labelled by majority gear,
/// with exact ties dropped.
std::vector<Window> segment(std::span<const Record> records, std::size_t window = 50, std::size_t step = 25,
                            SegmentStats* stats = nullptr);

/// Number of window start offsets for a stream of n records.
std::size_t window_count(std::size_t n, std::size_t window = 50, std::size_t step = 25);

struct SplitRatios {
    double train = 0.70;
    double validation = 0.15;
    double test = 0.15;
};

struct ChannelStats {
    std::array<double, 3> mean{0.0, 0.0, 0.0};
    std::array<double, 3> std{1.0, 1.0, 1.0};
};

struct WindowedDataset {
    std::vector<Window> train;
    std::vector<Window> validation;
    std::vector<Window> test;
    ChannelStats stats;
    bool normalized = false;
};

/// Contiguous block split in source order. Windows at the head of a later
/// partition that share samples with the previous partition are dropped.
WindowedDataset split(std::vector<Window> windows, SplitRatios ratios = {});

/// Per-channel z-score with mean and standard deviation taken from the
/// training windows only (std floored at 1e-8).
WindowedDataset normalize(WindowedDataset ds);
ChannelStats channel_stats(std::span<const Window> windows);
void apply_stats(std::span<Window> windows, const ChannelStats& stats);

/// Stacks the selected windows into a [B x window x 3] batch.
Tensor stack_windows(std::span<const Window> windows, std::span<const std::size_t> indices);
Tensor stack_windows(std::span<const Window> windows);

/// Convenience pipeline: segment, split and normalize with default settings.
WindowedDataset prepare_dataset(std::span<const Record> records, SplitRatios ratios = {});

KeyValues dataset_summary(const WindowedDataset& ds);

}  // namespace gearnet
