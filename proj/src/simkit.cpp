#include "clicklab/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "clicklab/errors.hpp"
#include "clicklab/metrics.hpp"
#include "clicklab/rng.hpp"

namespace clicklab {

namespace {

[[noreturn]] void model_error(const std::string& msg) {
    throw AnalysisError("detector model: " + msg);
}

double lerp(double x0, double y0, double x1, double y1, double x) {
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

bool close(double a, double b) { return std::abs(a - b) < 1e-9; }

}  // namespace

double DetectorModel::dark_rate_hz(double temperature_c,
                                   std::string_view bias) const {
    if (dark_rate.empty()) return 0.0;
    std::vector<const DarkRatePoint*> rows;
    std::set<std::string> labels;
    for (const auto& p : dark_rate) {
        labels.insert(p.bias_label);
        if (p.bias_label == bias) rows.push_back(&p);
    }
    if (rows.empty()) {
        std::ostringstream msg;
        msg << "unknown bias label '" << bias << "'; configured:";
        for (const auto& l : labels) msg << " '" << l << "'";
        model_error(msg.str());
    }
    if (rows.size() == 1) return rows.front()->rate_hz;
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) {
        return a->temperature_c < b->temperature_c;
    });
    for (const auto* p : rows)
        if (close(p->temperature_c, temperature_c)) return p->rate_hz;
    if (temperature_c < rows.front()->temperature_c ||
        temperature_c > rows.back()->temperature_c)
        model_error("temperature outside the dark rate table; the table is "
                    "calibration data and is never extrapolated");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (temperature_c <= rows[i]->temperature_c) {
            // dark counts grow exponentially with temperature, so
            // interpolate the logarithm
            const double lr = lerp(rows[i - 1]->temperature_c,
                                   std::log(rows[i - 1]->rate_hz),
                                   rows[i]->temperature_c,
                                   std::log(rows[i]->rate_hz), temperature_c);
            return std::exp(lr);
        }
    }
    return rows.back()->rate_hz;  // unreachable
}

double DetectorModel::relative_sensitivity(double temperature_c,
                                           double wavelength_nm) const {
    if (rel_sensitivity.empty()) return 1.0;
    std::vector<double> temps;
    for (const auto& p : rel_sensitivity) {
        bool seen = false;
        for (double t : temps) seen = seen || close(t, p.temperature_c);
        if (!seen) temps.push_back(p.temperature_c);
    }
    double use_temp = temperature_c;
    bool found = false;
    for (double t : temps)
        if (close(t, temperature_c)) {
            use_temp = t;
            found = true;
        }
    if (!found) {
        if (temps.size() == 1) {
            use_temp = temps.front();  // single calibration point: constant
        } else {
            model_error("temperature not in the sensitivity table; "
                        "measured operating points are not interpolated");
        }
    }
    std::vector<const RelSensitivityPoint*> rows;
    for (const auto& p : rel_sensitivity)
        if (close(p.temperature_c, use_temp)) rows.push_back(&p);
    if (rows.size() == 1) return rows.front()->value;
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) {
        return a->wavelength_nm < b->wavelength_nm;
    });
    if (wavelength_nm < rows.front()->wavelength_nm ||
        wavelength_nm > rows.back()->wavelength_nm)
        model_error("wavelength outside the sensitivity table; the table is "
                    "never extrapolated");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (wavelength_nm <= rows[i]->wavelength_nm)
            return lerp(rows[i - 1]->wavelength_nm, rows[i - 1]->value,
                        rows[i]->wavelength_nm, rows[i]->value,
                        wavelength_nm);
    }
    return rows.back()->value;  // unreachable
}

double DetectorModel::efficiency(double temperature_c,
                                 double wavelength_nm) const {
    return efficiency_eta0 * relative_sensitivity(temperature_c,
                                                  wavelength_nm);
}

double DetectorModel::afterpulse_probability(double temperature_c) const {
    if (afterpulse_prob.empty()) return 0.0;
    if (afterpulse_prob.size() == 1) return afterpulse_prob.front().probability;
    auto rows = afterpulse_prob;
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.temperature_c < b.temperature_c;
    });
    for (const auto& p : rows)
        if (close(p.temperature_c, temperature_c)) return p.probability;
    if (temperature_c < rows.front().temperature_c ||
        temperature_c > rows.back().temperature_c)
        model_error("temperature outside the afterpulse table; the table is "
                    "never extrapolated");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (temperature_c <= rows[i].temperature_c)
            return lerp(rows[i - 1].temperature_c, rows[i - 1].probability,
                        rows[i].temperature_c, rows[i].probability,
                        temperature_c);
    }
    return rows.back().probability;  // unreachable
}

void DetectorModel::check() const {
    auto fail = [&](const std::string& msg) {
        throw ConfigError("detector model '" + name + "': " + msg);
    };
    if (!(efficiency_eta0 >= 0.0 && efficiency_eta0 <= 1.0))
        fail("efficiency_eta0 must be in [0, 1]");
    if (dead_time_ps < 0) fail("dead_time_ps must be >= 0");
    if (jitter_sigma_ps < 0.0) fail("jitter_sigma_ps must be >= 0");
    if (afterpulse_delay.t0_ps < 0) fail("afterpulse t0 must be >= 0");
    if (afterpulse_delay.tau_ps <= 0) fail("afterpulse tau must be > 0");
    for (const auto& p : afterpulse_prob)
        if (!(p.probability >= 0.0 && p.probability < 1.0))
            fail("afterpulse probability must be in [0, 1)");
    std::set<std::pair<double, std::string>> dark_seen;
    for (const auto& p : dark_rate) {
        if (!(p.rate_hz > 0.0)) fail("dark rates must be positive");
        if (!dark_seen.insert({p.temperature_c, p.bias_label}).second)
            fail("duplicate dark rate row");
    }
    for (const auto& p : rel_sensitivity) {
        if (!(p.value > 0.0)) fail("sensitivity values must be positive");
        if (close(p.temperature_c, -60.0) && !close(p.value, 1.0))
            fail("sensitivity is normalized to 1 at -60 C");
    }
}

double CwSourceModel::photon_rate_hz() const {
    return power_w * attenuation_mu / photon_energy_j(wavelength_nm);
}

void CwSourceModel::check() const {
    if (!(power_w > 0.0)) throw ConfigError("cw source: power must be > 0");
    if (!(attenuation_mu >= 0.0 && attenuation_mu <= 1.0))
        throw ConfigError("cw source: attenuation_mu must be in [0, 1]");
    if (!(attenuation_mu_rel_err >= 0.0))
        throw ConfigError("cw source: attenuation_mu_rel_err must be >= 0");
    if (!(wavelength_nm > 0.0))
        throw ConfigError("cw source: wavelength must be > 0");
}

void PdcSourceModel::check() const {
    if (!(rep_rate_hz > 0.0))
        throw ConfigError("pdc source: repetition rate must be > 0");
    if (sync_divider < 1)
        throw ConfigError("pdc source: sync divider must be >= 1");
    if (!(mean_pairs_per_pulse >= 0.0))
        throw ConfigError("pdc source: mean pairs per pulse must be >= 0");
    if (!(path_eta_signal >= 0.0 && path_eta_signal <= 1.0) ||
        !(path_eta_idler >= 0.0 && path_eta_idler <= 1.0))
        throw ConfigError("pdc source: path efficiencies must be in [0, 1]");
    if (!(pair_time_spread_ps >= 0.0))
        throw ConfigError("pdc source: pair time spread must be >= 0");
    if (!(wavelength_signal_nm > 0.0) || !(wavelength_idler_nm > 0.0))
        throw ConfigError("pdc source: wavelengths must be > 0");
}

ChannelStream simulate_poisson_clicks(double rate_hz, TimestampPs duration_ps,
                                      std::uint64_t seed,
                                      std::uint8_t channel) {
    if (rate_hz < 0.0)
        throw AnalysisError("simulate_poisson_clicks: negative rate");
    if (duration_ps < 0)
        throw AnalysisError("simulate_poisson_clicks: negative duration");
    ChannelStream out;
    out.channel = channel;
    out.duration_ps = duration_ps;
    if (rate_hz == 0.0 || duration_ps == 0) return out;

    Rng rng(seed);
    const double mean_gap_ps = 1e12 / rate_hz;
    out.tags.reserve(static_cast<std::size_t>(
        1.1 * rate_hz * double(duration_ps) * 1e-12 + 16.0));
    double t = 0.0;
    for (;;) {
        t += rng.exponential(mean_gap_ps);
        const auto tag = static_cast<TimestampPs>(std::llround(t));
        if (tag >= duration_ps) break;
        out.tags.push_back(tag);
    }
    return out;
}

ChannelStream photon_arrivals_cw(const CwSourceModel& src,
                                 TimestampPs duration_ps, std::uint64_t seed,
                                 std::uint8_t channel) {
    src.check();
    return simulate_poisson_clicks(src.photon_rate_hz(), duration_ps, seed,
                                   channel);
}

PdcStreams simulate_pdc(const PdcSourceModel& src, TimestampPs duration_ps,
                        std::uint64_t seed) {
    src.check();
    if (duration_ps < 0) throw AnalysisError("simulate_pdc: negative duration");

    PdcStreams out;
    out.sync.channel = sync_channel;
    out.signal.channel = signal_channel;
    out.idler.channel = idler_channel;
    out.sync.duration_ps = out.signal.duration_ps = out.idler.duration_ps =
        duration_ps;
    if (duration_ps == 0) return out;

    const double pulse_period = src.pulse_period_ps();
    const double sync_period = pulse_period * double(src.sync_divider);
    out.sync.tags.reserve(
        static_cast<std::size_t>(double(duration_ps) / sync_period) + 2);
    for (std::uint64_t k = 0;; ++k) {
        const auto t = static_cast<TimestampPs>(
            std::llround(double(k) * sync_period));
        if (t >= duration_ps) break;
        out.sync.tags.push_back(t);
    }

    auto n_pulses = static_cast<std::uint64_t>(
        std::ceil(double(duration_ps) / pulse_period));
    while (n_pulses > 0 &&
           std::llround(double(n_pulses - 1) * pulse_period) >= duration_ps)
        --n_pulses;

    Rng rng(seed);
    const std::uint64_t pairs =
        rng.poisson(src.mean_pairs_per_pulse * double(n_pulses));
    out.signal.tags.reserve(
        static_cast<std::size_t>(double(pairs) * src.path_eta_signal) + 16);
    out.idler.tags.reserve(
        static_cast<std::size_t>(double(pairs) * src.path_eta_idler) + 16);
    for (std::uint64_t p = 0; p < pairs; ++p) {
        const std::uint64_t pulse = rng.uniform_index(n_pulses);
        // both photons of a pair leave the crystal at the same instant
        const double emission = double(pulse) * pulse_period +
                                rng.gaussian(src.pair_time_spread_ps);
        const auto t = static_cast<TimestampPs>(std::llround(emission));
        const bool keep_signal = rng.bernoulli(src.path_eta_signal);
        const bool keep_idler = rng.bernoulli(src.path_eta_idler);
        if (t < 0 || t >= duration_ps) continue;
        if (keep_signal) out.signal.tags.push_back(t);
        if (keep_idler) out.idler.tags.push_back(t);
    }
    std::sort(out.signal.tags.begin(), out.signal.tags.end());
    std::sort(out.idler.tags.begin(), out.idler.tags.end());
    return out;
}

namespace {

struct PendingAfterpulse {
    TimestampPs t;
    int depth;
    bool operator>(const PendingAfterpulse& o) const {
        return t != o.t ? t > o.t : depth > o.depth;
    }
};

constexpr int max_afterpulse_depth = 16;

}  // namespace

ChannelStream detect(const ChannelStream& photons, const DetectorModel& det,
                     const DetectionSettings& settings, std::uint64_t seed) {
    det.check();
    require_valid(photons, "detect");
    const TimestampPs duration = photons.duration_ps;

    ChannelStream out;
    out.channel = photons.channel;
    out.duration_ps = duration;
    if (duration <= 0) return out;

    const double dark_rate =
        det.dark_rate_hz(settings.temperature_c, settings.bias_label);
    const double p_ap = det.afterpulse_probability(settings.temperature_c);

    Rng rng(seed);

    // incident photons that actually fire the diode
    std::vector<TimestampPs> primaries;
    if (!photons.empty()) {
        const double eta =
            det.efficiency(settings.temperature_c, settings.wavelength_nm);
        primaries.reserve(
            static_cast<std::size_t>(eta * double(photons.size())) + 16);
        for (TimestampPs t : photons.tags)
            if (rng.bernoulli(eta) && t < duration) primaries.push_back(t);
    }

    // dark counts, merged in
    if (dark_rate > 0.0) {
        const double mean_gap_ps = 1e12 / dark_rate;
        std::vector<TimestampPs> darks;
        darks.reserve(static_cast<std::size_t>(
            1.1 * dark_rate * double(duration) * 1e-12 + 16.0));
        double t = 0.0;
        for (;;) {
            t += rng.exponential(mean_gap_ps);
            const auto tag = static_cast<TimestampPs>(std::llround(t));
            if (tag >= duration) break;
            darks.push_back(tag);
        }
        std::vector<TimestampPs> merged(primaries.size() + darks.size());
        std::merge(primaries.begin(), primaries.end(), darks.begin(),
                   darks.end(), merged.begin());
        primaries = std::move(merged);
    }

    // dead-time walk with cascading afterpulses
    std::priority_queue<PendingAfterpulse, std::vector<PendingAfterpulse>,
                        std::greater<PendingAfterpulse>>
        pending;
    out.tags.reserve(primaries.size());
    std::size_t next_primary = 0;
    TimestampPs last_accepted = 0;
    bool any_accepted = false;
    while (next_primary < primaries.size() || !pending.empty()) {
        TimestampPs t;
        int depth;
        const bool take_pending =
            !pending.empty() &&
            (next_primary >= primaries.size() ||
             pending.top().t <= primaries[next_primary]);
        if (take_pending) {
            t = pending.top().t;
            depth = pending.top().depth;
            pending.pop();
        } else {
            t = primaries[next_primary++];
            depth = 0;
        }
        if (any_accepted && t - last_accepted < det.dead_time_ps)
            continue;  // the diode has not recovered yet
        out.tags.push_back(t);
        last_accepted = t;
        any_accepted = true;
        if (depth < max_afterpulse_depth && rng.bernoulli(p_ap)) {
            const double delay =
                double(det.afterpulse_delay.t0_ps) +
                rng.exponential(double(det.afterpulse_delay.tau_ps));
            const auto ap = t + static_cast<TimestampPs>(std::llround(delay));
            if (ap < duration) pending.push({ap, depth + 1});
        }
    }

    // timing jitter, bounded at three sigma so that the dead-time floor
    // cannot erode by more than 6 sigma
    if (det.jitter_sigma_ps > 0.0) {
        for (auto& t : out.tags) {
            t += static_cast<TimestampPs>(
                std::llround(rng.gaussian_truncated(det.jitter_sigma_ps)));
            t = std::clamp<TimestampPs>(t, 0, duration);
        }
        std::sort(out.tags.begin(), out.tags.end());
    }
    return out;
}

}
