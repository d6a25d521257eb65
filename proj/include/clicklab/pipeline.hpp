#pragma once

#include <cstdint>
#include <optional>

#include "clicklab/config.hpp"
#include "clicklab/filters.hpp"
#include "clicklab/metrics.hpp"
#include "clicklab/pairs.hpp"
#include "clicklab/simkit.hpp"
#include "clicklab/timetag.hpp"

namespace clicklab {

// Post-selection and afterpulse statistics of one detected stream.
struct StreamAnalysis {
    ChannelStream raw;
    ChannelStream kept;              // after blocking
    TimestampPs block_ps = 0;        // blocking actually applied
    RateEstimate raw_rate;
    RateEstimate post_rate;
    TimestampPs raw_window_ps = 0;   // afterpulse windows actually used
    TimestampPs post_window_ps = 0;
    ProbabilityEstimate raw_afterpulse;
    ProbabilityEstimate post_afterpulse;
    Histogram inter_event{1, 0, 1};
};

// Simulates one detector stream from the run config and applies the
// configured blocking. kind selects dark (no photons) or cw illumination.
StreamAnalysis analyze_stream(const ChannelStream& photons,
                              const DetectorModel& det,
                              const DetectionSettings& settings,
                              const RunConfig& rc, std::uint64_t detect_seed);

struct CwCharacterization {
    StreamAnalysis lit;    // illuminated run
    StreamAnalysis dark;   // companion run with the beam blocked
    double photon_rate_hz = 0.0;  // incident rate implied by the source
    ValueWithError efficiency;
    double nep_w_per_sqrt_hz = 0.0;
};

// Dark-only characterization: simulate, post-select, afterpulse statistics.
StreamAnalysis run_dark(const RunConfig& rc);
StreamAnalysis run_dark(const RunConfig& rc, const DetectorModel& det);

// Efficiency characterization: an illuminated run plus a dark companion run
// analyzed with the same post-selection; the blocking time enters the rate
// corrections as the dead-time constant.
CwCharacterization run_cw(const RunConfig& rc);
CwCharacterization run_cw(const RunConfig& rc, const CwSourceModel& src,
                          const DetectorModel& det);

struct PdcArm {
    StreamAnalysis stream;
    GateConfig gate;
    ChannelStream selected;          // blocked then gated
    RateEstimate singles;            // selected counts over the full duration
    TimestampPs afterpulse_window_ps = 0;
    ProbabilityEstimate afterpulse;  // on the selected stream
};

struct PdcExperiment {
    ChannelStream sync;
    PdcArm signal;
    PdcArm idler;
    TimestampPs pulse_period_ps = 0;

    CoincidenceResult raw_coincidences;       // unselected streams
    std::uint64_t raw_window_pairs = 0;       // all raw pairs in the window,
                                              // tags reused (histogram view)
    CoincidenceResult coincidences;           // selected streams
    ValueWithError accidentals;
    ValueWithError car;
    KlyshkoResult klyshko;
    Histogram xcorr{1, 0, 1};                 // selected streams
};

PdcExperiment run_pdc(const RunConfig& rc);

// All raw pairs with |t_b - t_a - offset| <= window / 2, tags reused, the
// integral of a cross-correlation histogram over the window.
std::uint64_t count_pairs_in_window(const ChannelStream& a,
                                    const ChannelStream& b,
                                    TimestampPs offset_ps,
                                    TimestampPs window_ps);

}
