#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "clicklab/errors.hpp"
#include "clicklab/simkit.hpp"

using namespace clicklab;

namespace {

DetectorModel bare_detector() {
    DetectorModel det;
    det.name = "bare";
    det.efficiency_eta0 = 1.0;
    return det;
}

DetectorModel table_detector() {
    DetectorModel det;
    det.name = "tabled";
    det.efficiency_eta0 = 0.5;
    det.dark_rate = {{-60.0, "low", 1000.0},
                     {-80.0, "low", 100.0},
                     {-60.0, "high", 12000.0}};
    det.rel_sensitivity = {{-60.0, 1500.0, 1.0},
                           {-60.0, 1600.0, 1.0},
                           {-80.0, 1500.0, 0.8},
                           {-80.0, 1600.0, 0.6}};
    det.afterpulse_prob = {{-60.0, 0.10}, {-90.0, 0.34}};
    return det;
}

}  // namespace

TEST_CASE("dark rate interpolates the logarithm over temperature") {
    auto det = table_detector();
    CHECK(det.dark_rate_hz(-70.0, "low") ==
          doctest::Approx(316.22776601683796).epsilon(1e-12));
    CHECK(det.dark_rate_hz(-60.0, "low") == 1000.0);
    CHECK(det.dark_rate_hz(-80.0, "low") == 100.0);
    // a single row for a label is constant in temperature
    CHECK(det.dark_rate_hz(-75.0, "high") == 12000.0);
    // calibration tables are never extrapolated
    CHECK_THROWS_AS(det.dark_rate_hz(-81.0, "low"), AnalysisError);
    CHECK_THROWS_AS(det.dark_rate_hz(-59.0, "low"), AnalysisError);
    CHECK_THROWS_WITH_AS(det.dark_rate_hz(-60.0, "medium"),
                         doctest::Contains("unknown bias label"),
                         AnalysisError);
    CHECK_THROWS_WITH_AS(det.dark_rate_hz(-60.0, "medium"),
                         doctest::Contains("'low'"), AnalysisError);
    DetectorModel empty;
    CHECK(empty.dark_rate_hz(-60.0, "anything") == 0.0);
}

TEST_CASE("relative sensitivity is linear in wavelength at a table "
          "temperature") {
    auto det = table_detector();
    CHECK(det.relative_sensitivity(-80.0, 1500.0) == doctest::Approx(0.8));
    CHECK(det.relative_sensitivity(-80.0, 1600.0) == doctest::Approx(0.6));
    CHECK(det.relative_sensitivity(-80.0, 1550.0) == doctest::Approx(0.7));
    CHECK(det.relative_sensitivity(-60.0, 1575.0) == doctest::Approx(1.0));
    // temperatures between calibration points are not invented
    CHECK_THROWS_AS(det.relative_sensitivity(-70.0, 1550.0), AnalysisError);
    // neither are wavelengths outside the scan
    CHECK_THROWS_AS(det.relative_sensitivity(-80.0, 1499.0), AnalysisError);
    CHECK_THROWS_AS(det.relative_sensitivity(-80.0, 1601.0), AnalysisError);

    DetectorModel one;
    one.rel_sensitivity = {{-60.0, 1550.0, 1.0}};
    CHECK(one.relative_sensitivity(-75.0, 1300.0) == 1.0);

    DetectorModel none;
    CHECK(none.relative_sensitivity(-75.0, 1300.0) == 1.0);
}

TEST_CASE("efficiency scales the reference value by the sensitivity") {
    auto det = table_detector();
    CHECK(det.efficiency(-80.0, 1550.0) == doctest::Approx(0.35));
    CHECK(det.efficiency(-60.0, 1520.0) == doctest::Approx(0.5));
}

TEST_CASE("afterpulse probability interpolates linearly in temperature") {
    auto det = table_detector();
    CHECK(det.afterpulse_probability(-60.0) == doctest::Approx(0.10));
    CHECK(det.afterpulse_probability(-90.0) == doctest::Approx(0.34));
    CHECK(det.afterpulse_probability(-75.0) == doctest::Approx(0.22));
    CHECK_THROWS_AS(det.afterpulse_probability(-91.0), AnalysisError);
    DetectorModel one;
    one.afterpulse_prob = {{-60.0, 0.2}};
    CHECK(one.afterpulse_probability(-90.0) == doctest::Approx(0.2));
    DetectorModel none;
    CHECK(none.afterpulse_probability(-90.0) == 0.0);
}

TEST_CASE("detector model validation") {
    auto det = table_detector();
    CHECK_NOTHROW(det.check());

    auto bad = det;
    bad.efficiency_eta0 = 1.5;
    CHECK_THROWS_AS(bad.check(), ConfigError);

    bad = det;
    bad.dead_time_ps = -1;
    CHECK_THROWS_AS(bad.check(), ConfigError);

    bad = det;
    bad.afterpulse_prob = {{-60.0, 1.0}};
    CHECK_THROWS_AS(bad.check(), ConfigError);

    bad = det;
    bad.dark_rate.push_back({-60.0, "low", 500.0});  // duplicate row
    CHECK_THROWS_AS(bad.check(), ConfigError);

    bad = det;
    bad.dark_rate.push_back({-70.0, "low", 0.0});
    CHECK_THROWS_AS(bad.check(), ConfigError);

    // the sensitivity scale is anchored at the reference temperature
    bad = det;
    bad.rel_sensitivity.push_back({-60.0, 1650.0, 0.9});
    CHECK_THROWS_AS(bad.check(), ConfigError);

    bad = det;
    bad.afterpulse_delay.tau_ps = 0;
    CHECK_THROWS_AS(bad.check(), ConfigError);
}

TEST_CASE("cw source photon rate") {
    CwSourceModel src;  // 1 mW, mu 4.7e-12, 1560 nm
    CHECK(src.photon_rate_hz() ==
          doctest::Approx(36910.14267322315).epsilon(1e-12));
    CHECK_NOTHROW(src.check());

    auto bad = src;
    bad.power_w = 0.0;
    CHECK_THROWS_AS(bad.check(), ConfigError);
    bad = src;
    bad.attenuation_mu = 1.5;
    CHECK_THROWS_AS(bad.check(), ConfigError);
    bad = src;
    bad.attenuation_mu_rel_err = -0.1;
    CHECK_THROWS_AS(bad.check(), ConfigError);

    // a blocked beam is a legal configuration
    src.attenuation_mu = 0.0;
    CHECK_NOTHROW(src.check());
    CHECK(src.photon_rate_hz() == 0.0);
}

TEST_CASE("poisson clicks are reproducible and well formed") {
    auto a = simulate_poisson_clicks(50'000.0, 1'000'000'000'000, 7);
    auto b = simulate_poisson_clicks(50'000.0, 1'000'000'000'000, 7);
    auto c = simulate_poisson_clicks(50'000.0, 1'000'000'000'000, 8);
    CHECK(a.tags == b.tags);
    CHECK(a.tags != c.tags);
    CHECK(a.channel == signal_channel);
    CHECK_NOTHROW(require_valid(a, "test"));
    CHECK(std::abs(double(a.size()) - 50'000.0) < 3.0 * std::sqrt(50'000.0));

    CHECK(simulate_poisson_clicks(0.0, 1000, 1).empty());
    CHECK(simulate_poisson_clicks(100.0, 0, 1).empty());
    CHECK_THROWS_AS(simulate_poisson_clicks(-1.0, 1000, 1), AnalysisError);
}

TEST_CASE("poisson click times pass a uniformity KS test") {
    const TimestampPs dur = 1'000'000'000'000;
    auto s = simulate_poisson_clicks(100'000.0, dur, 11);
    const double n = double(s.size());
    REQUIRE(n > 90'000);
    double d = 0.0;
    for (std::size_t i = 0; i < s.tags.size(); ++i) {
        const double u = double(s.tags[i]) / double(dur);
        d = std::max(d, std::abs(u - double(i) / n));
        d = std::max(d, std::abs(double(i + 1) / n - u));
    }
    // 1% critical value of the one-sample Kolmogorov-Smirnov statistic
    CHECK(d < 1.628 / std::sqrt(n));
}

TEST_CASE("downconversion streams share emission times") {
    PdcSourceModel src;
    src.mean_pairs_per_pulse = 1e-4;
    src.pair_time_spread_ps = 120.0;
    auto runs = simulate_pdc(src, 1'000'000'000'000, 3);

    CHECK(runs.sync.channel == sync_channel);
    CHECK(runs.signal.channel == signal_channel);
    CHECK(runs.idler.channel == idler_channel);
    CHECK_NOTHROW(require_valid(runs.sync, "t"));
    CHECK_NOTHROW(require_valid(runs.signal, "t"));
    CHECK_NOTHROW(require_valid(runs.idler, "t"));

    // 76 MHz divided by 128 over one second
    CHECK(runs.sync.size() == 593'750);
    CHECK(runs.sync.tags.front() == 0);

    // with lossless paths the two arms carry identical tag lists
    CHECK(runs.signal.tags == runs.idler.tags);
    const double mean = 1e-4 * 76e6;
    CHECK(std::abs(double(runs.signal.size()) - mean) <
          3.0 * std::sqrt(mean));

    auto again = simulate_pdc(src, 1'000'000'000'000, 3);
    CHECK(again.signal.tags == runs.signal.tags);
}

TEST_CASE("lossy paths thin each arm independently") {
    PdcSourceModel src;
    src.mean_pairs_per_pulse = 2e-4;
    src.path_eta_signal = 0.4;
    src.path_eta_idler = 0.7;
    auto runs = simulate_pdc(src, 200'000'000'000, 4);
    const double pairs = 2e-4 * 76e6 * 0.2;
    CHECK(std::abs(double(runs.signal.size()) - 0.4 * pairs) <
          4.0 * std::sqrt(0.4 * pairs));
    CHECK(std::abs(double(runs.idler.size()) - 0.7 * pairs) <
          4.0 * std::sqrt(0.7 * pairs));
    // every surviving tag is some emitted pair's instant, so each signal
    // tag either has an idler partner or its partner was absorbed; the
    // arms cannot contain tags the other arm never could have seen
    CHECK(runs.signal.duration_ps == runs.idler.duration_ps);
}

TEST_CASE("pdc source validation") {
    PdcSourceModel src;
    src.mean_pairs_per_pulse = -1.0;
    CHECK_THROWS_AS(src.check(), ConfigError);
    src = PdcSourceModel{};
    src.path_eta_signal = 1.2;
    CHECK_THROWS_AS(src.check(), ConfigError);
    src = PdcSourceModel{};
    src.sync_divider = 0;
    CHECK_THROWS_AS(src.check(), ConfigError);
    src = PdcSourceModel{};
    src.wavelength_idler_nm = 0.0;
    CHECK_THROWS_AS(src.check(), ConfigError);
}

TEST_CASE("an ideal detector passes photons through unchanged") {
    auto det = bare_detector();
    ChannelStream photons{1, 10'000, {5, 100, 2000, 9999}};
    auto out = detect(photons, det, {}, 42);
    CHECK(out.tags == photons.tags);
    CHECK(out.channel == photons.channel);
    CHECK(out.duration_ps == photons.duration_ps);
}

TEST_CASE("dead time swallows clicks measured from the last accepted one") {
    auto det = bare_detector();
    det.dead_time_ps = 1500;
    ChannelStream photons{1, 10'000, {0, 1000, 2000, 3000, 4500}};
    auto out = detect(photons, det, {}, 42);
    CHECK(out.tags == std::vector<TimestampPs>{0, 2000, 4500});
}

TEST_CASE("detection is reproducible per seed") {
    auto det = table_detector();
    det.dead_time_ps = 20'000;
    det.jitter_sigma_ps = 100.0;
    auto photons = simulate_poisson_clicks(200'000.0, 50'000'000'000, 5);
    DetectionSettings st{-60.0, 1550.0, "low"};
    auto a = detect(photons, det, st, 9);
    auto b = detect(photons, det, st, 9);
    auto c = detect(photons, det, st, 10);
    CHECK(a.tags == b.tags);
    CHECK(a.tags != c.tags);
    CHECK_NOTHROW(require_valid(a, "t"));
}

TEST_CASE("a dark detector clicks at the configured dark rate") {
    DetectorModel det;
    det.name = "dark";
    det.dark_rate = {{-60.0, "low", 10'000.0}};
    ChannelStream nothing{1, 1'000'000'000'000, {}};
    auto out = detect(nothing, det, {-60.0, 1560.0, "low"}, 12);
    CHECK(std::abs(double(out.size()) - 10'000.0) <
          3.0 * std::sqrt(10'000.0));
}

TEST_CASE("no two clicks are closer than the dead time without jitter") {
    auto det = table_detector();
    det.dead_time_ps = 5000;
    det.afterpulse_delay = {100, 2000};
    auto photons = simulate_poisson_clicks(500'000.0, 200'000'000'000, 6);
    auto out = detect(photons, det, {-60.0, 1550.0, "low"}, 13);
    REQUIRE(out.size() > 100);
    for (std::size_t i = 1; i < out.size(); ++i)
        CHECK(out.tags[i] - out.tags[i - 1] >= det.dead_time_ps);
}

TEST_CASE("bounded jitter erodes the dead-time floor by at most six sigma") {
    auto det = table_detector();
    det.dead_time_ps = 10'000;
    det.jitter_sigma_ps = 500.0;
    auto photons = simulate_poisson_clicks(400'000.0, 200'000'000'000, 14);
    auto out = detect(photons, det, {-60.0, 1550.0, "low"}, 15);
    REQUIRE(out.size() > 100);
    for (std::size_t i = 1; i < out.size(); ++i)
        CHECK(out.tags[i] - out.tags[i - 1] >= 10'000 - 6 * 500);
}

TEST_CASE("afterpulses cascade with the per-click probability") {
    DetectorModel det;
    det.name = "ap";
    det.efficiency_eta0 = 1.0;
    det.afterpulse_prob = {{-60.0, 0.2}};
    det.afterpulse_delay = {10, 100};

    const std::size_t n = 20'000;
    ChannelStream photons{1, 2'000'000'000, {}};
    for (std::size_t k = 0; k < n; ++k)
        photons.tags.push_back(TimestampPs(k) * 100'000);
    auto out = detect(photons, det, {}, 16);

    // each accepted click spawns a follow-up chain of mean p/(1-p)
    const double expect = double(n) / (1.0 - 0.2);
    CHECK(std::abs(double(out.size()) - expect) < 4.0 * 79.1);
    CHECK_NOTHROW(require_valid(out, "t"));
}
