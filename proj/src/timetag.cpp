#include "clicklab/timetag.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "clicklab/errors.hpp"

namespace clicklab {

std::optional<StreamViolation> validate(const ChannelStream& s) {
    if (s.duration_ps < 0)
        return StreamViolation{0, "negative duration"};
    for (std::size_t i = 0; i < s.tags.size(); ++i) {
        if (s.tags[i] < 0)
            return StreamViolation{i, "negative timestamp"};
        if (i > 0 && s.tags[i] < s.tags[i - 1])
            return StreamViolation{i, "timestamps out of order"};
        if (s.tags[i] > s.duration_ps)
            return StreamViolation{i, "timestamp exceeds duration"};
    }
    return std::nullopt;
}

void require_valid(const ChannelStream& s, const char* where) {
    if (auto v = validate(s)) {
        std::ostringstream msg;
        msg << where << ": invalid stream on channel "
            << static_cast<int>(s.channel) << ": " << v->reason << " at index "
            << v->index;
        throw AnalysisError(msg.str());
    }
}

ChannelStream merge(const ChannelStream& a, const ChannelStream& b) {
    if (a.channel != b.channel)
        throw AnalysisError("merge: channel mismatch");
    if (a.duration_ps != b.duration_ps)
        throw AnalysisError("merge: duration mismatch");
    ChannelStream out;
    out.channel = a.channel;
    out.duration_ps = a.duration_ps;
    out.tags.resize(a.tags.size() + b.tags.size());
    std::merge(a.tags.begin(), a.tags.end(), b.tags.begin(), b.tags.end(),
               out.tags.begin());
    return out;
}

void TagRun::add(ChannelStream s) {
    if (streams.empty()) {
        duration_ps = s.duration_ps;
    } else if (s.duration_ps != duration_ps) {
        throw AnalysisError("tag run: streams must share one duration");
    }
    if (streams.count(s.channel))
        throw AnalysisError("tag run: duplicate channel " +
                            std::to_string(int(s.channel)));
    auto ch = s.channel;
    streams.emplace(ch, std::move(s));
}

const ChannelStream& TagRun::channel(std::uint8_t ch) const {
    auto it = streams.find(ch);
    if (it == streams.end())
        throw AnalysisError("tag run: no channel " + std::to_string(int(ch)));
    return it->second;
}

namespace {

constexpr char csv_magic[] = "#clicklab-csv";
constexpr char bin_magic[] = "CLK";
constexpr char format_version = '1';

std::vector<TimeTag> flatten_sorted(const TagRun& run) {
    std::size_t total = 0;
    for (const auto& [ch, s] : run.streams) total += s.tags.size();
    std::vector<TimeTag> all;
    all.reserve(total);
    for (const auto& [ch, s] : run.streams) {
        if (s.duration_ps != run.duration_ps)
            throw AnalysisError("write_tags: stream duration mismatch");
        if (validate(s))
            throw AnalysisError("write_tags: invalid stream on channel " +
                                std::to_string(int(ch)));
        for (TimestampPs t : s.tags) all.push_back({t, ch});
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const TimeTag& x, const TimeTag& y) {
                         return x.t != y.t ? x.t < y.t : x.channel < y.channel;
                     });
    return all;
}

void put_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
    return v;
}

void write_csv(const TagRun& run, const std::filesystem::path& path) {
    std::string out;
    out += csv_magic;
    out += " v";
    out += format_version;
    out += " duration_ps=" + std::to_string(run.duration_ps) + "\n";
    for (const auto& [k, v] : run.metadata) {
        if (k.find_first_of("=\n") != std::string::npos ||
            v.find('\n') != std::string::npos)
            throw ConfigError("write_tags: metadata key/value cannot contain "
                              "'=' in the key or newlines");
        out += "#meta " + k + "=" + v + "\n";
    }
    for (const TimeTag& tag : flatten_sorted(run)) {
        out += std::to_string(int(tag.channel));
        out += ',';
        out += std::to_string(tag.t);
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open for writing: " + path.string());
    f.write(out.data(), std::streamsize(out.size()));
    if (!f) throw ConfigError("write failed: " + path.string());
}

void write_binary(const TagRun& run, const std::filesystem::path& path) {
    std::string out;
    out += bin_magic;
    out += format_version;
    put_u64_le(out, std::uint64_t(run.duration_ps));
    for (const TimeTag& tag : flatten_sorted(run)) {
        out.push_back(char(tag.channel));
        put_u64_le(out, std::uint64_t(tag.t));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open for writing: " + path.string());
    f.write(out.data(), std::streamsize(out.size()));
    if (!f) throw ConfigError("write failed: " + path.string());
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open: " + path.string());
    std::ostringstream buf;
    buf << f.rdbuf();
    return std::move(buf).str();
}

TimestampPs parse_int(std::string_view text, const std::string& context) {
    TimestampPs value = 0;
    auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError(context + ": bad integer '" + std::string(text) +
                          "'");
    return value;
}

struct RunBuilder {
    TagRun run;
    TimestampPs last_t = -1;

    void set_duration(TimestampPs d, const std::string& where) {
        if (d < 0) throw ConfigError(where + ": negative duration");
        run.duration_ps = d;
    }

    void add_tag(int channel, TimestampPs t, const std::string& where) {
        if (channel < 0 || channel > 255)
            throw ConfigError(where + ": channel out of range");
        if (t < 0) throw ConfigError(where + ": negative timestamp");
        if (t < last_t) throw ConfigError(where + ": timestamps out of order");
        if (t > run.duration_ps)
            throw ConfigError(where + ": timestamp exceeds duration");
        last_t = t;
        auto ch = std::uint8_t(channel);
        auto it = run.streams.find(ch);
        if (it == run.streams.end()) {
            ChannelStream s;
            s.channel = ch;
            s.duration_ps = run.duration_ps;
            it = run.streams.emplace(ch, std::move(s)).first;
        }
        it->second.tags.push_back(t);
    }
};

TagRun read_csv(const std::string& text, const std::filesystem::path& path) {
    const std::string where = path.string();
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind(csv_magic, 0) != 0)
        throw ConfigError(where + ": missing header");
    std::istringstream header(line.substr(std::strlen(csv_magic)));
    std::string version, durfield;
    header >> version >> durfield;
    if (version.size() < 2 || version[0] != 'v')
        throw ConfigError(where + ": malformed header");
    if (version != std::string("v") + format_version)
        throw ConfigError(where + ": unsupported format version " + version);
    if (durfield.rfind("duration_ps=", 0) != 0)
        throw ConfigError(where + ": header lacks duration_ps");
    RunBuilder b;
    b.set_duration(parse_int(durfield.substr(12), where), where);

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("#meta ", 0) == 0) {
                std::string kv = line.substr(6);
                auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw ConfigError(where + ":" + std::to_string(lineno) +
                                      ": malformed #meta line");
                b.run.metadata[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError(where + ":" + std::to_string(lineno) +
                              ": expected 'channel,timestamp_ps'");
        auto ch = parse_int(std::string_view(line).substr(0, comma),
                            where + ":" + std::to_string(lineno));
        auto t = parse_int(std::string_view(line).substr(comma + 1),
                           where + ":" + std::to_string(lineno));
        b.add_tag(int(ch), t, where + ":" + std::to_string(lineno));
    }
    return std::move(b.run);
}

TagRun read_binary(const std::string& text,
                   const std::filesystem::path& path) {
    const std::string where = path.string();
    if (text.size() < 4 || text.compare(0, 3, bin_magic) != 0)
        throw ConfigError(where + ": not a tag file");
    if (text[3] != format_version)
        throw ConfigError(where + ": unsupported format version byte '" +
                          std::string(1, text[3]) + "'");
    if (text.size() < 12) throw ConfigError(where + ": truncated header");
    const auto* bytes = reinterpret_cast<const unsigned char*>(text.data());
    RunBuilder b;
    b.set_duration(TimestampPs(get_u64_le(bytes + 4)), where);
    std::size_t pos = 12;
    if ((text.size() - pos) % 9 != 0)
        throw ConfigError(where + ": truncated record");
    while (pos < text.size()) {
        int ch = bytes[pos];
        auto t = TimestampPs(get_u64_le(bytes + pos + 1));
        b.add_tag(ch, t, where);
        pos += 9;
    }
    return std::move(b.run);
}

}  // namespace

TagRun read_tags(const std::filesystem::path& path) {
    return read_tags_auto(path);
}

TagRun read_tags_auto(const std::filesystem::path& path) {
    std::string text = read_all(path);
    if (text.rfind(bin_magic, 0) == 0) return read_binary(text, path);
    if (text.rfind(csv_magic, 0) == 0) return read_csv(text, path);
    throw ConfigError(path.string() + ": not a tag file");
}

void write_tags(const TagRun& run, const std::filesystem::path& path,
                TagFormat format) {
    if (format == TagFormat::csv)
        write_csv(run, path);
    else
        write_binary(run, path);
}

void write_tags_auto(const TagRun& run, const std::filesystem::path& path) {
    write_tags(run, path,
               path.extension() == ".csv" ? TagFormat::csv : TagFormat::binary);
}

}
