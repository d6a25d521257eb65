#include "clicklab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "clicklab/errors.hpp"

namespace clicklab {

Histogram::Histogram(TimestampPs bin_width_ps, TimestampPs origin_ps,
                     std::size_t bin_count)
    : bin_width_(bin_width_ps), origin_(origin_ps), counts_(bin_count, 0) {
    if (bin_width_ps <= 0) throw AnalysisError("histogram: bin width <= 0");
    if (bin_count == 0) throw AnalysisError("histogram: no bins");
}

void Histogram::add(TimestampPs value, std::uint64_t weight) {
    total_in_ += weight;
    if (value < origin_) {
        underflow_ += weight;
        return;
    }
    auto bin = static_cast<std::uint64_t>(value - origin_) /
               static_cast<std::uint64_t>(bin_width_);
    if (bin >= counts_.size()) {
        overflow_ += weight;
        return;
    }
    counts_[static_cast<std::size_t>(bin)] += weight;
}

std::size_t Histogram::peak_bin() const {
    return static_cast<std::size_t>(
        std::max_element(counts_.begin(), counts_.end()) - counts_.begin());
}

void Histogram::write_csv(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open for writing: " + path.string());
    f << "#clicklab-hist v1 bin_width_ps=" << bin_width_
      << " origin_ps=" << origin_ << "\n";
    for (std::size_t i = 0; i < counts_.size(); ++i)
        f << i << ',' << counts_[i] << "\n";
    if (!f) throw ConfigError("write failed: " + path.string());
}

ProbabilityEstimate afterpulse_probability(const ChannelStream& s,
                                           TimestampPs window_ps) {
    require_valid(s, "afterpulse_probability");
    if (s.empty()) throw AnalysisError("afterpulse_probability: empty stream");
    if (window_ps < 0)
        throw AnalysisError("afterpulse_probability: negative window");
    std::uint64_t hits = 0;
    for (std::size_t i = 1; i < s.tags.size(); ++i) {
        if (s.tags[i] - s.tags[i - 1] <= window_ps) ++hits;
    }
    ProbabilityEstimate est;
    est.trials = s.tags.size();
    est.value = double(hits) / double(est.trials);
    est.err = std::sqrt(est.value * (1.0 - est.value) / double(est.trials));
    return est;
}

TimestampPs afterpulse_window_ps(double rate_hz) {
    if (!(rate_hz > 0.0))
        throw AnalysisError("afterpulse_window: rate must be positive");
    return static_cast<TimestampPs>(std::llround(0.1 / rate_hz * 1e12));
}

Histogram inter_event_histogram(const ChannelStream& s,
                                TimestampPs bin_width_ps,
                                TimestampPs max_delay_ps,
                                DelayPairing pairing) {
    require_valid(s, "inter_event_histogram");
    if (bin_width_ps <= 0)
        throw AnalysisError("inter_event_histogram: bin width <= 0");
    if (max_delay_ps < bin_width_ps)
        throw AnalysisError("inter_event_histogram: range below one bin");
    const auto bins = static_cast<std::size_t>(max_delay_ps / bin_width_ps);
    const TimestampPs limit = TimestampPs(bins) * bin_width_ps;
    Histogram h(bin_width_ps, 0, bins);
    const auto& t = s.tags;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (pairing == DelayPairing::next_event_only) {
            if (i + 1 < t.size() && t[i + 1] - t[i] < limit)
                h.add(t[i + 1] - t[i]);
            continue;
        }
        for (std::size_t j = i + 1; j < t.size() && t[j] - t[i] < limit; ++j)
            h.add(t[j] - t[i]);
    }
    return h;
}

TimestampPs choose_blocking_time(const Histogram& h, double residual_target) {
    if (!(residual_target > 0.0 && residual_target < 1.0))
        throw AnalysisError("choose_blocking_time: residual target must be "
                            "inside (0, 1)");
    const auto& counts = h.counts();
    const std::size_t n = counts.size();
    const std::size_t bg_bins = std::max<std::size_t>(1, n / 5);
    double bg = 0.0;
    for (std::size_t i = n - bg_bins; i < n; ++i) bg += double(counts[i]);
    bg /= double(bg_bins);

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += double(counts[i]) - bg;
    if (total <= 0.0) return 0;  // nothing above the flat background

    const double threshold = (1.0 - residual_target) * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cum += double(counts[i]) - bg;
        if (cum >= threshold)
            return h.origin_ps() + TimestampPs(i + 1) * h.bin_width_ps();
    }
    return h.origin_ps() + TimestampPs(n) * h.bin_width_ps();
}

double photon_energy_j(double wavelength_nm) {
    if (!(wavelength_nm > 0.0))
        throw AnalysisError("photon_energy: wavelength must be positive");
    constexpr double planck = 6.62607015e-34;
    constexpr double light_speed = 299792458.0;
    return planck * light_speed / (wavelength_nm * 1e-9);
}

RateEstimate RateEstimate::from_counts(std::uint64_t count,
                                       TimestampPs duration_ps) {
    if (duration_ps <= 0)
        throw AnalysisError("rate estimate: duration must be positive");
    const double seconds = double(duration_ps) * 1e-12;
    return {double(count) / seconds, std::sqrt(double(count)) / seconds};
}

ValueWithError detector_efficiency(const EfficiencyInput& in) {
    if (!(in.power_w > 0.0))
        throw AnalysisError("detector_efficiency: power must be positive");
    if (!(in.mu > 0.0 && in.mu <= 1.0))
        throw AnalysisError("detector_efficiency: mu must be in (0, 1]");
    if (in.tau_ps < 0)
        throw AnalysisError("detector_efficiency: negative tau");
    if (in.detected.hz < 0.0 || in.dark.hz < 0.0)
        throw AnalysisError("detector_efficiency: negative rate");
    if (in.dark.hz > in.detected.hz)
        throw AnalysisError("detector_efficiency: dark rate exceeds detected "
                            "rate");
    const double tau_s = double(in.tau_ps) * 1e-12;
    const double den_r = 1.0 - in.detected.hz * tau_s;
    const double den_d = 1.0 - in.dark.hz * tau_s;
    if (den_r <= 0.0 || den_d <= 0.0)
        throw AnalysisError("detector_efficiency: rate * tau reaches 1, "
                            "correction diverges");

    const double k =
        photon_energy_j(in.wavelength_nm) / (in.power_w * in.mu);
    const double corrected_r = in.detected.hz / den_r;
    const double corrected_d = in.dark.hz / den_d;
    ValueWithError eta;
    eta.value = k * (corrected_r - corrected_d);

    const double slope_r = k / (den_r * den_r);
    const double slope_d = k / (den_d * den_d);
    eta.err = std::sqrt(std::pow(slope_r * in.detected.err_hz, 2) +
                        std::pow(slope_d * in.dark.err_hz, 2) +
                        std::pow(eta.value * in.mu_rel_err, 2));
    return eta;
}

double nep_w_per_sqrt_hz(double eta, double dark_hz, double wavelength_nm) {
    if (!(eta > 0.0)) throw AnalysisError("nep: efficiency must be positive");
    if (dark_hz < 0.0) throw AnalysisError("nep: negative dark rate");
    return photon_energy_j(wavelength_nm) / eta * std::sqrt(2.0 * dark_hz);
}

namespace {

// Delay from each tag to its most recent sync tag; tags preceding the first
// sync are skipped. The callback sees each delay once.
template <typename F>
void for_each_sync_delay(const ChannelStream& s, const ChannelStream& sync,
                         const char* where, F&& f) {
    require_valid(s, where);
    require_valid(sync, where);
    if (sync.empty()) throw AnalysisError(std::string(where) +
                                          ": empty sync stream");
    if (s.duration_ps != sync.duration_ps)
        throw AnalysisError(std::string(where) +
                            ": duration mismatch with sync");
    std::size_t k = 0;
    for (TimestampPs t : s.tags) {
        if (t < sync.tags.front()) continue;
        while (k + 1 < sync.tags.size() && sync.tags[k + 1] <= t) ++k;
        f(t - sync.tags[k]);
    }
}

}  // namespace

Histogram sync_delay_histogram(const ChannelStream& s,
                               const ChannelStream& sync,
                               TimestampPs bin_width_ps,
                               TimestampPs max_delay_ps) {
    if (bin_width_ps <= 0)
        throw AnalysisError("sync_delay_histogram: bin width <= 0");
    TimestampPs range = max_delay_ps;
    if (range == 0) {
        // size the range from the sync spacing (plus the tail after the
        // last sync tick)
        for (std::size_t i = 1; i < sync.tags.size(); ++i)
            range = std::max(range, sync.tags[i] - sync.tags[i - 1]);
        if (!sync.tags.empty())
            range = std::max(range, sync.duration_ps - sync.tags.back());
        range = std::max(range, bin_width_ps);
    }
    const auto bins = static_cast<std::size_t>(
        (range + bin_width_ps - 1) / bin_width_ps);
    Histogram h(bin_width_ps, 0, std::max<std::size_t>(bins, 1));
    for_each_sync_delay(s, sync, "sync_delay_histogram",
                        [&](TimestampPs d) { h.add(d); });
    return h;
}

Histogram folded_sync_histogram(const ChannelStream& s,
                                const ChannelStream& sync,
                                TimestampPs bin_width_ps,
                                TimestampPs period_ps) {
    if (bin_width_ps <= 0)
        throw AnalysisError("folded_sync_histogram: bin width <= 0");
    if (period_ps <= 0)
        throw AnalysisError("folded_sync_histogram: period must be positive");
    const auto bins = static_cast<std::size_t>(
        (period_ps + bin_width_ps - 1) / bin_width_ps);
    Histogram h(bin_width_ps, 0, bins);
    for_each_sync_delay(s, sync, "folded_sync_histogram", [&](TimestampPs d) {
        h.add(d % period_ps);
    });
    return h;
}

TimestampPs suggest_gate_offset(const Histogram& sync_hist) {
    if (sync_hist.total_in() == 0)
        throw AnalysisError("suggest_gate_offset: empty histogram");
    return sync_hist.bin_center(sync_hist.peak_bin());
}

}
