#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "clicklab/timetag.hpp"

namespace clicklab {

struct DarkRatePoint {
    double temperature_c = 0.0;
    std::string bias_label;
    double rate_hz = 0.0;
};

struct RelSensitivityPoint {
    double temperature_c = 0.0;
    double wavelength_nm = 0.0;
    double value = 0.0;
};

struct AfterpulsePoint {
    double temperature_c = 0.0;
    double probability = 0.0;
};

struct AfterpulseDelay {
    TimestampPs t0_ps = 30'000;       // earliest afterpulse delay
    TimestampPs tau_ps = 1'000'000;   // exponential tail constant
};

// Empirical description of one negative-feedback avalanche photodiode.
// Tables are calibration data; lookups never extrapolate. A table with a
// single temperature (or wavelength) entry is treated as constant in that
// variable, which keeps ad hoc single-point models usable.
struct DetectorModel {
    std::string name;
    double efficiency_eta0 = 0.0;     // detection probability at reference
    std::vector<RelSensitivityPoint> rel_sensitivity;  // 1.0 rows at -60 C
    std::vector<DarkRatePoint> dark_rate;
    std::vector<AfterpulsePoint> afterpulse_prob;
    AfterpulseDelay afterpulse_delay;
    TimestampPs dead_time_ps = 0;
    double jitter_sigma_ps = 0.0;

    // Interpolated lookups. Dark rate is linear in log(rate) over
    // temperature for a fixed bias label; relative sensitivity is piecewise
    // linear in wavelength at an exact table temperature; the afterpulse
    // probability is linear in temperature. Out-of-table arguments throw
    // AnalysisError.
    double dark_rate_hz(double temperature_c, std::string_view bias) const;
    double relative_sensitivity(double temperature_c,
                                double wavelength_nm) const;
    double efficiency(double temperature_c, double wavelength_nm) const;
    double afterpulse_probability(double temperature_c) const;

    void check() const;  // throws ConfigError on out-of-range fields
};

struct CwSourceModel {
    double power_w = 1e-3;
    double wavelength_nm = 1560.0;
    double attenuation_mu = 4.7e-12;  // in [0, 1]; 0 models a blocked beam
    double attenuation_mu_rel_err = 0.0;

    double photon_rate_hz() const;    // P * mu / E_photon
    void check() const;
};

struct PdcSourceModel {
    double rep_rate_hz = 76e6;
    std::uint32_t sync_divider = 128;
    double mean_pairs_per_pulse = 0.0;
    double path_eta_signal = 1.0;
    double path_eta_idler = 1.0;
    double pair_time_spread_ps = 0.0;  // shared emission-time spread, rms
    double wavelength_signal_nm = 1546.0;
    double wavelength_idler_nm = 1556.0;

    double pulse_period_ps() const { return 1e12 / rep_rate_hz; }
    void check() const;
};

// Conventional channel numbers for generated streams.
inline constexpr std::uint8_t sync_channel = 0;
inline constexpr std::uint8_t signal_channel = 1;
inline constexpr std::uint8_t idler_channel = 2;

// Homogeneous Poisson clicks: i.i.d. exponential gaps of mean 1/rate_hz,
// truncated to the window [0, duration_ps). Fixed seed, fixed output.
ChannelStream simulate_poisson_clicks(double rate_hz, TimestampPs duration_ps,
                                      std::uint64_t seed,
                                      std::uint8_t channel = signal_channel);

// Poisson photon arrivals of a continuous-wave source after attenuation.
ChannelStream photon_arrivals_cw(const CwSourceModel& src,
                                 TimestampPs duration_ps, std::uint64_t seed,
                                 std::uint8_t channel = signal_channel);

struct PdcStreams {
    ChannelStream sync;    // divided pump clock, first tick at t = 0
    ChannelStream signal;  // photon arrivals, channel 1
    ChannelStream idler;   // photon arrivals, channel 2
};

// Pulsed downconversion source. Every pump pulse emits a Poisson number of
// pairs; both photons of a pair share one emission instant (pulse time plus
// a Gaussian of rms pair_time_spread_ps) and then survive their arms with
// the configured path efficiencies independently.
PdcStreams simulate_pdc(const PdcSourceModel& src, TimestampPs duration_ps,
                        std::uint64_t seed);

struct DetectionSettings {
    double temperature_c = -60.0;
    double wavelength_nm = 1560.0;
    std::string bias_label;
};

// Full detector response applied to a photon arrival stream, in order:
// thinning by efficiency(T, lambda), Poisson dark counts at
// dark_rate(T, bias), a non-extending dead time measured from the last
// accepted click, afterpulses (probability p per accepted click, delay
// t0 + Exp(tau), cascading up to depth 16, subject to the same dead time),
// then Gaussian timing jitter with re-sorting and clamping to the window.
ChannelStream detect(const ChannelStream& photons, const DetectorModel& det,
                     const DetectionSettings& settings, std::uint64_t seed);

}
