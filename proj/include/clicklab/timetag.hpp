#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace clicklab {

// All timestamps are integer picoseconds from the start of the acquisition.
using TimestampPs = std::int64_t;

struct TimeTag {
    TimestampPs t = 0;
    std::uint8_t channel = 0;
};

// One detector channel over one acquisition window. Tags are sorted
// nondecreasing, nonnegative and never exceed duration_ps.
struct ChannelStream {
    std::uint8_t channel = 0;
    TimestampPs duration_ps = 0;
    std::vector<TimestampPs> tags;

    std::size_t size() const { return tags.size(); }
    bool empty() const { return tags.empty(); }
    double rate_hz() const {
        return duration_ps > 0 ? static_cast<double>(tags.size()) * 1e12 /
                                     static_cast<double>(duration_ps)
                               : 0.0;
    }
};

struct StreamViolation {
    std::size_t index = 0;
    std::string reason;
};

// First violated stream invariant, or nullopt if the stream is valid.
std::optional<StreamViolation> validate(const ChannelStream& s);

// Throws AnalysisError with the violation details if the stream is invalid.
void require_valid(const ChannelStream& s, const char* where);

// Sorted union of two streams on the same channel, multiplicity preserved.
// Throws AnalysisError on channel or duration mismatch.
ChannelStream merge(const ChannelStream& a, const ChannelStream& b);

// A set of per-channel streams sharing one acquisition window.
struct TagRun {
    TimestampPs duration_ps = 0;
    std::map<std::uint8_t, ChannelStream> streams;
    std::map<std::string, std::string> metadata;

    // Inserts a stream, enforcing the shared duration and unique channel.
    void add(ChannelStream s);
    const ChannelStream& channel(std::uint8_t ch) const;
    bool has_channel(std::uint8_t ch) const { return streams.count(ch) != 0; }
};

enum class TagFormat { csv, binary };

// File I/O. The CSV form is
//   #clicklab-csv v1 duration_ps=<int>
//   <channel>,<timestamp_ps>
// with rows sorted by timestamp (ties by channel). Metadata is carried in
// optional "#meta key=value" lines after the header. The binary form is the
// magic "CLK1", a 64-bit little-endian duration, then one record per tag:
// 8-bit channel followed by a 64-bit little-endian timestamp, same order.
// The binary form does not carry metadata. Empty channels are not
// representable in either form. Throws ConfigError on malformed input.
TagRun read_tags(const std::filesystem::path& path);
void write_tags(const TagRun& run, const std::filesystem::path& path,
                TagFormat format);

// Format chosen by file content (read) or extension (write, ".csv" vs rest).
TagRun read_tags_auto(const std::filesystem::path& path);
void write_tags_auto(const TagRun& run, const std::filesystem::path& path);

}
