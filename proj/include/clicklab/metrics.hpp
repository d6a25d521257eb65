#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "clicklab/timetag.hpp"

namespace clicklab {

// Fixed-width binning of integer picosecond values. Values below the origin
// are tallied as underflow, values at or past the last bin edge as overflow,
// so total_in always equals the sum of counts plus underflow plus overflow.
class Histogram {
public:
    Histogram(TimestampPs bin_width_ps, TimestampPs origin_ps,
              std::size_t bin_count);

    void add(TimestampPs value, std::uint64_t weight = 1);

    TimestampPs bin_width_ps() const { return bin_width_; }
    TimestampPs origin_ps() const { return origin_; }
    std::size_t bin_count() const { return counts_.size(); }
    std::uint64_t count(std::size_t bin) const { return counts_.at(bin); }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    std::uint64_t total_in() const { return total_in_; }
    std::uint64_t underflow() const { return underflow_; }
    std::uint64_t overflow() const { return overflow_; }

    TimestampPs bin_left_edge(std::size_t bin) const {
        return origin_ + static_cast<TimestampPs>(bin) * bin_width_;
    }
    TimestampPs bin_center(std::size_t bin) const {
        return bin_left_edge(bin) + bin_width_ / 2;
    }
    std::size_t peak_bin() const;  // first bin holding the maximum count

    // "#clicklab-hist v1 bin_width_ps=<int> origin_ps=<int>" then
    // "bin_index,count" rows for every bin.
    void write_csv(const std::filesystem::path& path) const;

private:
    TimestampPs bin_width_;
    TimestampPs origin_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_in_ = 0;
    std::uint64_t underflow_ = 0;
    std::uint64_t overflow_ = 0;
};

struct ProbabilityEstimate {
    double value = 0.0;
    double err = 0.0;      // binomial standard error
    std::uint64_t trials = 0;
};

// Fraction of tags whose immediate predecessor lies within window_ps
// (boundary included). Throws AnalysisError on an empty stream.
ProbabilityEstimate afterpulse_probability(const ChannelStream& s,
                                           TimestampPs window_ps);

// Measurement window for the estimator above: one tenth of the mean spacing
// at the given click rate, rounded to the nearest picosecond.
TimestampPs afterpulse_window_ps(double rate_hz);

enum class DelayPairing {
    all_within_window,  // every later tag within max_delay of each tag
    next_event_only,    // only the immediate successor
};

// Histogram of delays between tags, origin 0, covering [0, max_delay_ps).
Histogram inter_event_histogram(const ChannelStream& s,
                                TimestampPs bin_width_ps,
                                TimestampPs max_delay_ps,
                                DelayPairing pairing =
                                    DelayPairing::all_within_window);

// Given an inter-event histogram whose tail is flat background plus a
// decaying afterpulse excess, picks the smallest delay by which the
// cumulative excess has reached (1 - residual_target) of its total. The
// background level is the mean of the last fifth of the bins. Returns the
// right edge of the crossing bin, or 0 when there is no positive excess.
TimestampPs choose_blocking_time(const Histogram& h, double residual_target);

// Planck constant times speed of light over the wavelength, in joules.
double photon_energy_j(double wavelength_nm);

struct RateEstimate {
    double hz = 0.0;
    double err_hz = 0.0;

    static RateEstimate from_counts(std::uint64_t count,
                                    TimestampPs duration_ps);
};

struct ValueWithError {
    double value = 0.0;
    double err = 0.0;
};

struct EfficiencyInput {
    RateEstimate detected;       // post-selected click rate under illumination
    RateEstimate dark;           // post-selected dark click rate
    TimestampPs tau_ps = 0;      // dead-time correction constant
    double power_w = 0.0;        // optical power before attenuation
    double mu = 0.0;             // attenuation factor, 0 < mu <= 1
    double mu_rel_err = 0.0;     // relative uncertainty of mu
    double wavelength_nm = 0.0;
};

// Detection efficiency of a free-running click detector:
//   eta = E_photon / (P mu) * (R/(1 - R tau) - D/(1 - D tau))
// The rate corrections are the usual non-extending dead-time form, i.e. the
// counts are referred to the live time duration - count * tau. Uncertainty
// is first-order propagation of the rate errors and the mu error.
// Throws AnalysisError when a correction denominator is not positive, when
// dark exceeds detected, or on nonpositive power / mu / wavelength.
ValueWithError detector_efficiency(const EfficiencyInput& in);

// Noise equivalent power E_photon / eta * sqrt(2 D), in W / sqrt(Hz).
double nep_w_per_sqrt_hz(double eta, double dark_hz, double wavelength_nm);

// Histogram of each tag's delay to its most recent sync tag. Covers
// [0, max_delay_ps); pass 0 to size the range from the largest sync spacing.
Histogram sync_delay_histogram(const ChannelStream& s,
                               const ChannelStream& sync,
                               TimestampPs bin_width_ps,
                               TimestampPs max_delay_ps = 0);

// Same delays folded modulo period_ps, for sync signals that tick once per
// several source periods.
Histogram folded_sync_histogram(const ChannelStream& s,
                                const ChannelStream& sync,
                                TimestampPs bin_width_ps,
                                TimestampPs period_ps);

// Gate center suggestion: center of the fullest bin of a sync delay
// histogram. Throws AnalysisError if the histogram holds no entries.
TimestampPs suggest_gate_offset(const Histogram& sync_hist);

}
