#include "clicklab/filters.hpp"

#include <cmath>

#include "clicklab/errors.hpp"

namespace clicklab {

ChannelStream blocking_filter(const ChannelStream& s, TimestampPs block_ps) {
    if (block_ps < 0) throw AnalysisError("blocking_filter: negative block");
    require_valid(s, "blocking_filter");
    ChannelStream out;
    out.channel = s.channel;
    out.duration_ps = s.duration_ps;
    if (block_ps == 0) {
        out.tags = s.tags;
        return out;
    }
    out.tags.reserve(s.tags.size());
    // The raw stream is sorted, so the immediate predecessor is the nearest
    // one; a single look-back decides each tag.
    for (std::size_t i = 0; i < s.tags.size(); ++i) {
        if (i == 0 || s.tags[i] - s.tags[i - 1] >= block_ps)
            out.tags.push_back(s.tags[i]);
    }
    return out;
}

ChannelStream time_gate(const ChannelStream& s, const ChannelStream& sync,
                        const GateConfig& gate) {
    if (gate.width_ps < 0) throw AnalysisError("time_gate: negative width");
    if (gate.period_ps < 0) throw AnalysisError("time_gate: negative period");
    require_valid(s, "time_gate");
    require_valid(sync, "time_gate");
    if (sync.empty()) throw AnalysisError("time_gate: empty sync stream");
    if (s.duration_ps != sync.duration_ps)
        throw AnalysisError("time_gate: duration mismatch with sync");

    ChannelStream out;
    out.channel = s.channel;
    out.duration_ps = s.duration_ps;
    out.tags.reserve(s.tags.size());

    const double period = static_cast<double>(gate.period_ps);
    std::size_t k = 0;  // index of the most recent sync tag
    for (TimestampPs t : s.tags) {
        if (t < sync.tags.front()) continue;  // before the first sync
        while (k + 1 < sync.tags.size() && sync.tags[k + 1] <= t) ++k;
        const TimestampPs d = t - sync.tags[k] - gate.offset_ps;
        if (gate.period_ps == 0) {
            // closed interval; doubling avoids rounding width/2
            if (2 * std::abs(d) <= gate.width_ps) out.tags.push_back(t);
        } else {
            double r = std::fmod(static_cast<double>(d), period);
            if (r > period / 2) r -= period;
            if (r <= -period / 2) r += period;
            if (2.0 * std::abs(r) <= static_cast<double>(gate.width_ps))
                out.tags.push_back(t);
        }
    }
    return out;
}

}
