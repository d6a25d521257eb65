#include "clicklab/pairs.hpp"

#include <cmath>
#include <cstdlib>

#include "clicklab/errors.hpp"

namespace clicklab {

Histogram cross_correlation_histogram(const ChannelStream& a,
                                      const ChannelStream& b,
                                      TimestampPs bin_width_ps,
                                      TimestampPs range_ps) {
    require_valid(a, "cross_correlation_histogram");
    require_valid(b, "cross_correlation_histogram");
    if (a.duration_ps != b.duration_ps)
        throw AnalysisError("cross_correlation_histogram: duration mismatch");
    if (bin_width_ps <= 0)
        throw AnalysisError("cross_correlation_histogram: bin width <= 0");
    if (range_ps < bin_width_ps)
        throw AnalysisError("cross_correlation_histogram: range below one "
                            "bin");
    // 2k+1 bins put delay zero in the center bin; every bin is fully
    // covered by the scan window [-k*w, (k+1)*w).
    const TimestampPs k = range_ps / bin_width_ps;
    const TimestampPs lo = -k * bin_width_ps;
    const TimestampPs hi = (k + 1) * bin_width_ps;
    Histogram h(bin_width_ps, lo, static_cast<std::size_t>(2 * k + 1));

    std::size_t j0 = 0;
    for (const TimestampPs ta : a.tags) {
        while (j0 < b.tags.size() && b.tags[j0] - ta < lo) ++j0;
        for (std::size_t j = j0; j < b.tags.size() && b.tags[j] - ta < hi;
             ++j)
            h.add(b.tags[j] - ta);
    }
    return h;
}

CoincidenceResult count_coincidences(const ChannelStream& a,
                                     const ChannelStream& b,
                                     TimestampPs offset_ps,
                                     TimestampPs window_ps, bool keep_pairs) {
    require_valid(a, "count_coincidences");
    require_valid(b, "count_coincidences");
    if (a.duration_ps != b.duration_ps)
        throw AnalysisError("count_coincidences: duration mismatch");
    if (window_ps < 0)
        throw AnalysisError("count_coincidences: negative window");

    CoincidenceResult res;
    res.offset_ps = offset_ps;
    res.window_ps = window_ps;

    std::size_t i = 0, j = 0;
    while (i < a.tags.size() && j < b.tags.size()) {
        const TimestampPs d = b.tags[j] - a.tags[i] - offset_ps;
        if (2 * std::abs(d) <= window_ps) {
            ++res.count;
            if (keep_pairs) res.pairs.emplace_back(i, j);
            ++i;
            ++j;
        } else if (d < 0) {
            ++j;  // b is too early for this a and for every later a
        } else {
            ++i;  // b is too late for this a; a can never match
        }
    }
    res.rate = RateEstimate::from_counts(res.count, a.duration_ps);
    return res;
}

double accidental_rate_pulsed(double rate_a_hz, double rate_b_hz,
                              double rep_rate_hz) {
    if (!(rep_rate_hz > 0.0))
        throw AnalysisError("accidental_rate: repetition rate must be "
                            "positive");
    if (rate_a_hz < 0.0 || rate_b_hz < 0.0)
        throw AnalysisError("accidental_rate: negative rate");
    return rate_a_hz * rate_b_hz / rep_rate_hz;
}

double accidental_rate_cw(double rate_a_hz, double rate_b_hz,
                          TimestampPs window_ps) {
    if (window_ps < 0) throw AnalysisError("accidental_rate: negative window");
    if (rate_a_hz < 0.0 || rate_b_hz < 0.0)
        throw AnalysisError("accidental_rate: negative rate");
    return rate_a_hz * rate_b_hz * 2.0 * double(window_ps) * 1e-12;
}

ValueWithError car(const RateEstimate& coincidences,
                   const ValueWithError& accidentals) {
    if (!(accidentals.value > 0.0))
        throw AnalysisError("car: accidental rate must be positive");
    if (coincidences.hz < 0.0)
        throw AnalysisError("car: negative coincidence rate");
    ValueWithError out;
    out.value = coincidences.hz / accidentals.value;
    if (coincidences.hz > 0.0) {
        const double rel_c = coincidences.err_hz / coincidences.hz;
        const double rel_a = accidentals.err / accidentals.value;
        out.err = out.value * std::sqrt(rel_c * rel_c + rel_a * rel_a);
    } else {
        out.err = coincidences.err_hz / accidentals.value;
    }
    return out;
}

namespace {

ValueWithError heralded_efficiency(const RateEstimate& coincidences,
                                   const ValueWithError& accidentals,
                                   const RateEstimate& heralds) {
    if (!(heralds.hz > 0.0))
        throw AnalysisError("klyshko_efficiency: singles rate must be "
                            "positive");
    ValueWithError out;
    const double net = coincidences.hz - accidentals.value;
    out.value = net / heralds.hz;
    const double err_net = std::hypot(coincidences.err_hz, accidentals.err);
    out.err = std::abs(out.value) *
              std::sqrt(std::pow(net != 0.0 ? err_net / net : 0.0, 2) +
                        std::pow(heralds.err_hz / heralds.hz, 2));
    if (net == 0.0) out.err = err_net / heralds.hz;
    return out;
}

}  // namespace

KlyshkoResult klyshko_efficiency(const RateEstimate& coincidences,
                                 const ValueWithError& accidentals,
                                 const RateEstimate& singles_signal,
                                 const RateEstimate& singles_idler) {
    KlyshkoResult res;
    res.signal = heralded_efficiency(coincidences, accidentals, singles_idler);
    res.idler = heralded_efficiency(coincidences, accidentals, singles_signal);
    return res;
}

TimestampPs suggest_coincidence_offset(const Histogram& xcorr) {
    if (xcorr.total_in() == 0)
        throw AnalysisError("suggest_coincidence_offset: empty histogram");
    return xcorr.bin_center(xcorr.peak_bin());
}

}
