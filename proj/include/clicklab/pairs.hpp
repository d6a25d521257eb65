#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "clicklab/metrics.hpp"
#include "clicklab/timetag.hpp"

namespace clicklab {

// Histogram of t_b - t_a over all pairs with |t_b - t_a| <= range_ps.
// Origin -range_ps, so delay 0 falls in the central bin when range_ps is a
// multiple of bin_width_ps. Throws AnalysisError on duration mismatch.
Histogram cross_correlation_histogram(const ChannelStream& a,
                                      const ChannelStream& b,
                                      TimestampPs bin_width_ps,
                                      TimestampPs range_ps);

struct CoincidenceResult {
    std::uint64_t count = 0;
    RateEstimate rate;           // count / duration, Poisson error
    TimestampPs offset_ps = 0;
    TimestampPs window_ps = 0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // optional
};

// Pairs tags of a and b with |t_b - t_a - offset| <= window / 2, each tag
// used at most once, walking both streams in time order and always taking
// the earliest compatible partner. For sorted streams this greedy matching
// has maximum cardinality, so the count is symmetric under swapping the
// streams and negating the offset. Index pairs are stored only when
// keep_pairs is set. Throws AnalysisError on duration mismatch or negative
// window.
CoincidenceResult count_coincidences(const ChannelStream& a,
                                     const ChannelStream& b,
                                     TimestampPs offset_ps,
                                     TimestampPs window_ps,
                                     bool keep_pairs = false);

// Accidental coincidence rate of a pulsed pair source: R_a R_b / rep_rate.
// Both clicks must fall in the same emission slot, so the window drops out.
double accidental_rate_pulsed(double rate_a_hz, double rate_b_hz,
                              double rep_rate_hz);

// Continuous-wave counterpart: R_a R_b * 2 * window.
double accidental_rate_cw(double rate_a_hz, double rate_b_hz,
                          TimestampPs window_ps);

// Coincidence-to-accidental ratio with first-order error propagation.
ValueWithError car(const RateEstimate& coincidences,
                   const ValueWithError& accidentals);

struct KlyshkoResult {
    ValueWithError signal;  // (C - A) / N_idler
    ValueWithError idler;   // (C - A) / N_signal
};

// Heralded arm efficiencies from coincidences, accidentals and singles.
KlyshkoResult klyshko_efficiency(const RateEstimate& coincidences,
                                 const ValueWithError& accidentals,
                                 const RateEstimate& singles_signal,
                                 const RateEstimate& singles_idler);

// Offset suggestion: center of the fullest bin of a cross-correlation
// histogram.
TimestampPs suggest_coincidence_offset(const Histogram& xcorr);

}
