#include "clicklab/pipeline.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

#include "clicklab/errors.hpp"
#include "clicklab/rng.hpp"

namespace clicklab {

namespace {

// Seed stages so the photon stream and each detector draw from
// independent generators even though the run has one master seed.
constexpr std::uint64_t stage_source = 0;
constexpr std::uint64_t stage_detector_a = 1;
constexpr std::uint64_t stage_detector_b = 2;

TimestampPs resolve_block(const BlockingSetting& b, const Histogram& h,
                          double residual_target) {
    switch (b.mode) {
        case BlockingSetting::Mode::off: return 0;
        case BlockingSetting::Mode::fixed: return b.block_ps;
        case BlockingSetting::Mode::automatic:
            return choose_blocking_time(h, residual_target);
    }
    return 0;
}

void add_afterpulse_stats(StreamAnalysis& a) {
    if (a.raw_rate.hz > 0.0 && !a.raw.empty()) {
        a.raw_window_ps = afterpulse_window_ps(a.raw_rate.hz);
        a.raw_afterpulse = afterpulse_probability(a.raw, a.raw_window_ps);
    }
    if (a.post_rate.hz > 0.0 && !a.kept.empty()) {
        a.post_window_ps = afterpulse_window_ps(a.post_rate.hz);
        a.post_afterpulse = afterpulse_probability(a.kept, a.post_window_ps);
    }
}

}  // namespace

StreamAnalysis analyze_stream(const ChannelStream& photons,
                              const DetectorModel& det,
                              const DetectionSettings& settings,
                              const RunConfig& rc,
                              std::uint64_t detect_seed) {
    StreamAnalysis a;
    a.raw = detect(photons, det, settings, detect_seed);
    a.raw_rate = RateEstimate::from_counts(a.raw.size(), rc.duration_ps);
    a.inter_event =
        inter_event_histogram(a.raw, rc.hist_bin_ps, rc.hist_max_delay_ps);
    a.block_ps = resolve_block(rc.blocking, a.inter_event, rc.residual_target);
    a.kept = blocking_filter(a.raw, a.block_ps);
    a.post_rate = RateEstimate::from_counts(a.kept.size(), rc.duration_ps);
    add_afterpulse_stats(a);
    return a;
}

StreamAnalysis run_dark(const RunConfig& rc, const DetectorModel& det) {
    ChannelStream no_photons{signal_channel, rc.duration_ps, {}};
    DetectionSettings settings{rc.temperature_c, rc.wavelength_nm.value_or(0.0),
                               rc.bias_label};
    return analyze_stream(no_photons, det, settings, rc,
                          derive_seed(rc.seed, stage_detector_a));
}

StreamAnalysis run_dark(const RunConfig& rc) {
    return run_dark(rc, load_detector_model(rc.detector_path));
}

CwCharacterization run_cw(const RunConfig& rc, const CwSourceModel& src,
                          const DetectorModel& det) {
    CwSourceModel lamp = src;
    if (rc.wavelength_nm) lamp.wavelength_nm = *rc.wavelength_nm;
    DetectionSettings settings{rc.temperature_c, lamp.wavelength_nm,
                               rc.bias_label};

    CwCharacterization out;
    out.photon_rate_hz = lamp.photon_rate_hz();

    ChannelStream photons = photon_arrivals_cw(
        lamp, rc.duration_ps, derive_seed(rc.seed, stage_source));
    out.lit = analyze_stream(photons, det, settings, rc,
                             derive_seed(rc.seed, stage_detector_a));

    // The companion run with the beam blocked reuses the blocking time found
    // on the illuminated run so both rates see the same post-selection.
    RunConfig dark_rc = rc;
    dark_rc.blocking.mode = BlockingSetting::Mode::fixed;
    dark_rc.blocking.block_ps = out.lit.block_ps;
    ChannelStream no_photons{signal_channel, rc.duration_ps, {}};
    out.dark = analyze_stream(no_photons, det, settings, dark_rc,
                              derive_seed(rc.seed, stage_detector_b));

    EfficiencyInput in;
    in.detected = out.lit.post_rate;
    in.dark = out.dark.post_rate;
    in.tau_ps = out.lit.block_ps;
    in.power_w = lamp.power_w;
    in.mu = lamp.attenuation_mu;
    in.mu_rel_err = lamp.attenuation_mu_rel_err;
    in.wavelength_nm = lamp.wavelength_nm;
    out.efficiency = detector_efficiency(in);
    out.nep_w_per_sqrt_hz = nep_w_per_sqrt_hz(
        out.efficiency.value, out.dark.post_rate.hz, lamp.wavelength_nm);
    return out;
}

CwCharacterization run_cw(const RunConfig& rc) {
    return run_cw(rc, load_cw_source(rc.source_path),
                  load_detector_model(rc.detector_path));
}

std::uint64_t count_pairs_in_window(const ChannelStream& a,
                                    const ChannelStream& b,
                                    TimestampPs offset_ps,
                                    TimestampPs window_ps) {
    if (a.duration_ps != b.duration_ps)
        throw AnalysisError("count_pairs_in_window: duration mismatch");
    if (window_ps < 0)
        throw AnalysisError("count_pairs_in_window: negative window");
    std::uint64_t total = 0;
    std::size_t lo = 0, hi = 0;
    for (TimestampPs t : a.tags) {
        // b tags with 2 |t_b - t - offset| <= window
        while (lo < b.tags.size() &&
               2 * (b.tags[lo] - t - offset_ps) < -window_ps)
            ++lo;
        if (hi < lo) hi = lo;
        while (hi < b.tags.size() &&
               2 * (b.tags[hi] - t - offset_ps) <= window_ps)
            ++hi;
        total += hi - lo;
    }
    return total;
}

namespace {

PdcArm select_arm(StreamAnalysis&& stream, const ChannelStream& sync,
                  const RunConfig& rc, TimestampPs pulse_period_ps) {
    PdcArm arm;
    arm.stream = std::move(stream);
    switch (rc.gate.mode) {
        case GateSetting::Mode::off:
            arm.selected = arm.stream.kept;
            break;
        case GateSetting::Mode::fixed:
            arm.gate = GateConfig{rc.gate.offset_ps, rc.gate.width_ps,
                                  pulse_period_ps};
            arm.selected = time_gate(arm.stream.kept, sync, arm.gate);
            break;
        case GateSetting::Mode::automatic: {
            Histogram folded = folded_sync_histogram(
                arm.stream.kept, sync, rc.sync_hist_bin_ps, pulse_period_ps);
            arm.gate = GateConfig{suggest_gate_offset(folded),
                                  rc.gate.width_ps, pulse_period_ps};
            arm.selected = time_gate(arm.stream.kept, sync, arm.gate);
            break;
        }
    }
    arm.singles = RateEstimate::from_counts(arm.selected.size(),
                                            rc.duration_ps);
    if (arm.singles.hz > 0.0 && !arm.selected.empty()) {
        arm.afterpulse_window_ps = afterpulse_window_ps(arm.singles.hz);
        arm.afterpulse =
            afterpulse_probability(arm.selected, arm.afterpulse_window_ps);
    }
    return arm;
}

}  // namespace

PdcExperiment run_pdc(const RunConfig& rc) {
    PdcSourceModel src = load_pdc_source(rc.source_path);
    DetectorModel det_s = load_detector_model(rc.detector_signal_path);
    DetectorModel det_i = load_detector_model(rc.detector_idler_path);

    PdcStreams photons =
        simulate_pdc(src, rc.duration_ps, derive_seed(rc.seed, stage_source));

    double lambda_s = rc.wavelength_nm.value_or(src.wavelength_signal_nm);
    double lambda_i = rc.wavelength_nm.value_or(src.wavelength_idler_nm);
    DetectionSettings set_s{rc.temperature_c, lambda_s, rc.bias_label};
    DetectionSettings set_i{rc.temperature_c, lambda_i, rc.bias_label};

    PdcExperiment out;
    out.sync = std::move(photons.sync);
    out.pulse_period_ps =
        static_cast<TimestampPs>(std::llround(src.pulse_period_ps()));

    out.signal = select_arm(
        analyze_stream(photons.signal, det_s, set_s, rc,
                       derive_seed(rc.seed, stage_detector_a)),
        out.sync, rc, out.pulse_period_ps);
    out.idler = select_arm(
        analyze_stream(photons.idler, det_i, set_i, rc,
                       derive_seed(rc.seed, stage_detector_b)),
        out.sync, rc, out.pulse_period_ps);

    // Coincidences of the unselected streams, under both counting rules:
    // greedy one-to-one matching and the plain histogram integral where a
    // tag can enter several pairs.
    {
        Histogram raw_xc =
            cross_correlation_histogram(out.signal.stream.raw,
                                        out.idler.stream.raw, rc.xcorr_bin_ps,
                                        rc.xcorr_range_ps);
        TimestampPs raw_off = suggest_coincidence_offset(raw_xc);
        out.raw_coincidences =
            count_coincidences(out.signal.stream.raw, out.idler.stream.raw,
                               raw_off, rc.coincidence_window_ps);
        out.raw_window_pairs =
            count_pairs_in_window(out.signal.stream.raw, out.idler.stream.raw,
                                  raw_off, rc.coincidence_window_ps);
    }

    out.xcorr = cross_correlation_histogram(out.signal.selected,
                                            out.idler.selected,
                                            rc.xcorr_bin_ps, rc.xcorr_range_ps);
    TimestampPs offset = suggest_coincidence_offset(out.xcorr);
    out.coincidences =
        count_coincidences(out.signal.selected, out.idler.selected, offset,
                           rc.coincidence_window_ps);

    double acc = accidental_rate_pulsed(out.signal.singles.hz,
                                        out.idler.singles.hz, src.rep_rate_hz);
    out.accidentals.value = acc;
    double rs = out.signal.singles.hz, ri = out.idler.singles.hz;
    if (rs > 0.0 && ri > 0.0) {
        out.accidentals.err =
            acc * std::hypot(out.signal.singles.err_hz / rs,
                             out.idler.singles.err_hz / ri);
    }
    out.car = car(out.coincidences.rate, out.accidentals);
    out.klyshko = klyshko_efficiency(out.coincidences.rate, out.accidentals,
                                     out.signal.singles, out.idler.singles);
    return out;
}

}
