#pragma once

#include "clicklab/timetag.hpp"

namespace clicklab {

// Removes every tag that has an earlier tag of the same raw stream less than
// block_ps before it. Distances are measured against the raw stream, not the
// filtered one, so one early tag suppresses the whole burst that follows it.
// Tags sharing a timestamp count as being zero apart: only the first of a
// group of duplicates can survive. Consequently consecutive kept tags are
// separated by at least block_ps and the filter is idempotent.
// block_ps == 0 keeps everything; block_ps < 0 is an error.
ChannelStream blocking_filter(const ChannelStream& s, TimestampPs block_ps);

struct GateConfig {
    TimestampPs offset_ps = 0;
    TimestampPs width_ps = 1300;
    // 0 gates once per sync tag; > 0 repeats the gate every period_ps after
    // each sync, which matches a sync signal derived from a divided clock.
    TimestampPs period_ps = 0;
};

// Keeps tag t iff its delay to the most recent sync tag s (s <= t) satisfies
// |t - s - offset_ps| <= width_ps / 2, boundaries included. With period_ps
// set, the delay is first folded into (-period/2, period/2] around the
// nearest multiple of the period. Tags before the first sync are dropped.
// Throws AnalysisError on an empty sync stream or duration mismatch.
ChannelStream time_gate(const ChannelStream& s, const ChannelStream& sync,
                        const GateConfig& gate);

}
