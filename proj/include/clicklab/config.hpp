#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "clicklab/simkit.hpp"
#include "clicklab/thermo.hpp"
#include "clicklab/timetag.hpp"

namespace clicklab {

// Flat text configuration: "key = value" lines plus named table blocks.
//
//   kind = detector
//   efficiency_eta0 = 0.025
//   [dark_rate]                    # temperature_C, bias, rate_hz
//   -60, low, 800
//
// '#' starts a comment, blank lines separate nothing in particular. Every
// key and table must be consumed by the loader or loading fails, so typos
// surface as errors instead of silently applying defaults.
class ConfigDoc {
public:
    static ConfigDoc parse_file(const std::filesystem::path& path);
    static ConfigDoc parse_text(const std::string& text,
                                const std::string& origin);

    const std::filesystem::path& origin() const { return origin_; }
    std::filesystem::path resolve_path(const std::string& relative) const;

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key);
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key);
    double get_double(const std::string& key, double fallback);
    std::int64_t get_int(const std::string& key);
    std::int64_t get_int(const std::string& key, std::int64_t fallback);
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback);

    // Rows of a table block; empty when the block is absent.
    std::vector<std::vector<std::string>> take_table(const std::string& name);

    // Throws ConfigError listing any keys or tables never consumed.
    void finish();

    // All key/value pairs, for embedding resolved configs into reports.
    const std::map<std::string, std::string>& values() const {
        return values_;
    }

private:
    std::filesystem::path origin_;
    std::map<std::string, std::string> values_;
    std::map<std::string, std::vector<std::vector<std::string>>> tables_;
    std::set<std::string> used_keys_;
    std::set<std::string> used_tables_;
};

DetectorModel load_detector_model(const std::filesystem::path& path);
CwSourceModel load_cw_source(const std::filesystem::path& path);
PdcSourceModel load_pdc_source(const std::filesystem::path& path);

enum class ExperimentKind { dark, cw, pdc };

struct BlockingSetting {
    enum class Mode { off, automatic, fixed } mode = Mode::off;
    TimestampPs block_ps = 0;  // fixed mode only

    static BlockingSetting parse(const std::string& text);
    std::string describe() const;
};

struct GateSetting {
    enum class Mode { off, automatic, fixed } mode = Mode::off;
    TimestampPs offset_ps = 0;  // fixed mode only
    TimestampPs width_ps = 1300;

    static GateSetting parse(const std::string& text, TimestampPs width_ps);
    std::string describe() const;
};

// One simulated acquisition plus its analysis settings.
struct RunConfig {
    ExperimentKind experiment = ExperimentKind::dark;
    std::filesystem::path source_path;            // cw and pdc
    std::filesystem::path detector_path;          // dark and cw
    std::filesystem::path detector_signal_path;   // pdc
    std::filesystem::path detector_idler_path;    // pdc
    double temperature_c = -60.0;
    std::string bias_label;
    std::optional<double> wavelength_nm;          // defaults to the source's
    TimestampPs duration_ps = 0;
    std::uint64_t seed = 1;
    BlockingSetting blocking;
    GateSetting gate;
    double residual_target = 0.1;
    TimestampPs hist_bin_ps = 500'000;            // inter-event histograms
    TimestampPs hist_max_delay_ps = 20'000'000;
    TimestampPs sync_hist_bin_ps = 50;
    TimestampPs coincidence_window_ps = 1300;
    TimestampPs xcorr_bin_ps = 100;
    TimestampPs xcorr_range_ps = 5000;
    std::map<std::string, std::string> raw_values;  // resolved, for reports
};

RunConfig load_run_config(const std::filesystem::path& path);

struct ThermoConfig {
    ThermalPlant plant;
    PidController pid;
    double setpoint_k = 193.15;
    double start_t_k = 293.0;
    double duration_s = 7200.0;
    double dt_s = 0.1;
    double settle_band_k = 0.05;
    double parasitic_w = 0.0;
    double fill_kg = 14.4;
    std::uint64_t seed = 1;
    std::map<std::string, std::string> raw_values;
};

ThermoConfig load_thermo_config(const std::filesystem::path& path);

}
