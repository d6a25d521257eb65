#include "clicklab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "clicklab/errors.hpp"

namespace clicklab {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        cells.push_back(
            trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

double parse_double(const std::string& text, const std::string& context) {
    const std::string t = trim(text);
    double v = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size())
        throw ConfigError(context + ": bad number '" + text + "'");
    return v;
}

std::int64_t parse_i64(const std::string& text, const std::string& context) {
    const std::string t = trim(text);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec == std::errc{} && p == t.data() + t.size()) return v;
    // allow scientific notation for large picosecond values
    const double d = parse_double(t, context);
    if (std::abs(d) > 9.2e18 || d != std::floor(d))
        throw ConfigError(context + ": bad integer '" + text + "'");
    return static_cast<std::int64_t>(d);
}

}  // namespace

ConfigDoc ConfigDoc::parse_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_text(std::move(buf).str(), path.string());
}

ConfigDoc ConfigDoc::parse_text(const std::string& text,
                                const std::string& origin) {
    ConfigDoc doc;
    doc.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    std::string table;  // empty = top level
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos
                                    ? raw
                                    : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(where + ": malformed table header");
            table = trim(std::string_view(line).substr(1, line.size() - 2));
            if (table.empty())
                throw ConfigError(where + ": empty table name");
            doc.tables_[table];  // present even if no rows follow
            continue;
        }
        auto eq = line.find('=');
        if (eq != std::string::npos && table.empty()) {
            const std::string key = trim(std::string_view(line).substr(0, eq));
            const std::string value =
                trim(std::string_view(line).substr(eq + 1));
            if (key.empty()) throw ConfigError(where + ": empty key");
            if (!doc.values_.emplace(key, value).second)
                throw ConfigError(where + ": duplicate key '" + key + "'");
            continue;
        }
        if (!table.empty()) {
            doc.tables_[table].push_back(split_row(line));
            continue;
        }
        throw ConfigError(where + ": expected 'key = value' or '[table]'");
    }
    return doc;
}

std::filesystem::path ConfigDoc::resolve_path(
    const std::string& relative) const {
    std::filesystem::path p(relative);
    if (p.is_absolute()) return p;
    return origin_.parent_path() / p;
}

bool ConfigDoc::has(const std::string& key) const {
    return values_.count(key) != 0;
}

std::string ConfigDoc::get_string(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError(origin_.string() + ": missing key '" + key + "'");
    used_keys_.insert(key);
    return it->second;
}

std::string ConfigDoc::get_string(const std::string& key,
                                  const std::string& fallback) {
    if (!has(key)) return fallback;
    return get_string(key);
}

double ConfigDoc::get_double(const std::string& key) {
    return parse_double(get_string(key), origin_.string() + ": " + key);
}

double ConfigDoc::get_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return get_double(key);
}

std::int64_t ConfigDoc::get_int(const std::string& key) {
    return parse_i64(get_string(key), origin_.string() + ": " + key);
}

std::int64_t ConfigDoc::get_int(const std::string& key,
                                std::int64_t fallback) {
    if (!has(key)) return fallback;
    return get_int(key);
}

std::uint64_t ConfigDoc::get_uint(const std::string& key,
                                  std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const auto v = get_int(key);
    if (v < 0)
        throw ConfigError(origin_.string() + ": " + key +
                          " must be nonnegative");
    return static_cast<std::uint64_t>(v);
}

std::vector<std::vector<std::string>> ConfigDoc::take_table(
    const std::string& name) {
    used_tables_.insert(name);
    auto it = tables_.find(name);
    if (it == tables_.end()) return {};
    return it->second;
}

void ConfigDoc::finish() {
    std::vector<std::string> leftovers;
    for (const auto& [k, v] : values_)
        if (!used_keys_.count(k)) leftovers.push_back("key '" + k + "'");
    for (const auto& [k, v] : tables_)
        if (!used_tables_.count(k)) leftovers.push_back("table '" + k + "'");
    if (leftovers.empty()) return;
    std::string msg = origin_.string() + ": unrecognized entries:";
    for (const auto& l : leftovers) msg += " " + l;
    throw ConfigError(msg);
}

namespace {

void require_kind(ConfigDoc& doc, const std::string& expected) {
    const std::string kind = doc.get_string("kind");
    if (kind != expected)
        throw ConfigError(doc.origin().string() + ": expected kind '" +
                          expected + "', found '" + kind + "'");
}

void expect_cells(const std::vector<std::string>& row, std::size_t n,
                  const std::string& context) {
    if (row.size() != n)
        throw ConfigError(context + ": expected " + std::to_string(n) +
                          " comma-separated cells");
}

}  // namespace

DetectorModel load_detector_model(const std::filesystem::path& path) {
    ConfigDoc doc = ConfigDoc::parse_file(path);
    require_kind(doc, "detector");
    DetectorModel det;
    det.name = doc.get_string("name", path.stem().string());
    det.efficiency_eta0 = doc.get_double("efficiency_eta0");
    det.dead_time_ps = doc.get_int("dead_time_ps", 0);
    det.jitter_sigma_ps = doc.get_double("jitter_sigma_ps", 0.0);
    det.afterpulse_delay.t0_ps = doc.get_int("afterpulse_t0_ps", 30'000);
    det.afterpulse_delay.tau_ps =
        doc.get_int("afterpulse_tau_ps", 1'000'000);

    const std::string where = path.string();
    for (const auto& row : doc.take_table("rel_sensitivity")) {
        expect_cells(row, 3, where + ": rel_sensitivity");
        det.rel_sensitivity.push_back(
            {parse_double(row[0], where), parse_double(row[1], where),
             parse_double(row[2], where)});
    }
    for (const auto& row : doc.take_table("dark_rate")) {
        expect_cells(row, 3, where + ": dark_rate");
        det.dark_rate.push_back(
            {parse_double(row[0], where), row[1],
             parse_double(row[2], where)});
    }
    for (const auto& row : doc.take_table("afterpulse_prob")) {
        expect_cells(row, 2, where + ": afterpulse_prob");
        det.afterpulse_prob.push_back(
            {parse_double(row[0], where), parse_double(row[1], where)});
    }
    doc.finish();
    det.check();
    return det;
}

CwSourceModel load_cw_source(const std::filesystem::path& path) {
    ConfigDoc doc = ConfigDoc::parse_file(path);
    require_kind(doc, "cw_source");
    CwSourceModel src;
    src.power_w = doc.get_double("power_w", src.power_w);
    src.wavelength_nm = doc.get_double("wavelength_nm", src.wavelength_nm);
    src.attenuation_mu =
        doc.get_double("attenuation_mu", src.attenuation_mu);
    src.attenuation_mu_rel_err =
        doc.get_double("attenuation_mu_rel_err", src.attenuation_mu_rel_err);
    doc.finish();
    src.check();
    return src;
}

PdcSourceModel load_pdc_source(const std::filesystem::path& path) {
    ConfigDoc doc = ConfigDoc::parse_file(path);
    require_kind(doc, "pdc_source");
    PdcSourceModel src;
    src.rep_rate_hz = doc.get_double("rep_rate_hz", src.rep_rate_hz);
    src.sync_divider = static_cast<std::uint32_t>(
        doc.get_uint("sync_divider", src.sync_divider));
    src.mean_pairs_per_pulse =
        doc.get_double("mean_pairs_per_pulse", src.mean_pairs_per_pulse);
    src.path_eta_signal =
        doc.get_double("path_eta_signal", src.path_eta_signal);
    src.path_eta_idler = doc.get_double("path_eta_idler", src.path_eta_idler);
    src.pair_time_spread_ps =
        doc.get_double("pair_time_spread_ps", src.pair_time_spread_ps);
    src.wavelength_signal_nm =
        doc.get_double("wavelength_signal_nm", src.wavelength_signal_nm);
    src.wavelength_idler_nm =
        doc.get_double("wavelength_idler_nm", src.wavelength_idler_nm);
    doc.finish();
    src.check();
    return src;
}

BlockingSetting BlockingSetting::parse(const std::string& text) {
    BlockingSetting b;
    if (text == "auto") {
        b.mode = Mode::automatic;
    } else if (text == "off") {
        b.mode = Mode::off;
    } else {
        b.mode = Mode::fixed;
        b.block_ps = parse_i64(text, "blocking");
        if (b.block_ps < 0) throw ConfigError("blocking: negative time");
    }
    return b;
}

std::string BlockingSetting::describe() const {
    switch (mode) {
        case Mode::off: return "off";
        case Mode::automatic: return "auto";
        default: return std::to_string(block_ps);
    }
}

GateSetting GateSetting::parse(const std::string& text,
                               TimestampPs width_ps) {
    GateSetting g;
    g.width_ps = width_ps;
    if (width_ps < 0) throw ConfigError("gate: negative width");
    if (text == "auto") {
        g.mode = Mode::automatic;
    } else if (text == "off") {
        g.mode = Mode::off;
    } else {
        g.mode = Mode::fixed;
        g.offset_ps = parse_i64(text, "gate");
    }
    return g;
}

std::string GateSetting::describe() const {
    switch (mode) {
        case Mode::off: return "off";
        case Mode::automatic: return "auto";
        default: return std::to_string(offset_ps);
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    ConfigDoc doc = ConfigDoc::parse_file(path);
    require_kind(doc, "run");
    RunConfig rc;
    rc.raw_values = doc.values();

    const std::string experiment = doc.get_string("experiment");
    if (experiment == "dark") {
        rc.experiment = ExperimentKind::dark;
        rc.detector_path = doc.resolve_path(doc.get_string("detector"));
    } else if (experiment == "cw") {
        rc.experiment = ExperimentKind::cw;
        rc.source_path = doc.resolve_path(doc.get_string("source"));
        rc.detector_path = doc.resolve_path(doc.get_string("detector"));
    } else if (experiment == "pdc") {
        rc.experiment = ExperimentKind::pdc;
        rc.source_path = doc.resolve_path(doc.get_string("source"));
        rc.detector_signal_path =
            doc.resolve_path(doc.get_string("detector_signal"));
        rc.detector_idler_path =
            doc.resolve_path(doc.get_string("detector_idler"));
    } else {
        throw ConfigError(path.string() + ": experiment must be dark, cw or "
                          "pdc");
    }

    rc.temperature_c = doc.get_double("temperature_c");
    rc.bias_label = doc.get_string("bias", "");
    if (doc.has("wavelength_nm")) rc.wavelength_nm = doc.get_double(
        "wavelength_nm");
    if (doc.has("duration_ps")) {
        rc.duration_ps = doc.get_int("duration_ps");
    } else {
        rc.duration_ps = static_cast<TimestampPs>(
            std::llround(doc.get_double("duration_s") * 1e12));
    }
    if (rc.duration_ps <= 0)
        throw ConfigError(path.string() + ": duration must be positive");
    rc.seed = doc.get_uint("seed", 1);
    rc.blocking = BlockingSetting::parse(doc.get_string("blocking", "off"));
    rc.gate = GateSetting::parse(
        doc.get_string("gate", "off"),
        TimestampPs(doc.get_int("gate_width_ps", 1300)));
    rc.residual_target = doc.get_double("residual_target", 0.1);
    rc.hist_bin_ps = doc.get_int("hist_bin_ps", rc.hist_bin_ps);
    rc.hist_max_delay_ps =
        doc.get_int("hist_max_delay_ps", rc.hist_max_delay_ps);
    rc.sync_hist_bin_ps = doc.get_int("sync_hist_bin_ps", rc.sync_hist_bin_ps);
    rc.coincidence_window_ps =
        doc.get_int("coincidence_window_ps", rc.coincidence_window_ps);
    rc.xcorr_bin_ps = doc.get_int("xcorr_bin_ps", rc.xcorr_bin_ps);
    rc.xcorr_range_ps = doc.get_int("xcorr_range_ps", rc.xcorr_range_ps);
    doc.finish();
    return rc;
}

ThermoConfig load_thermo_config(const std::filesystem::path& path) {
    ConfigDoc doc = ConfigDoc::parse_file(path);
    require_kind(doc, "thermo");
    ThermoConfig tc;
    tc.raw_values = doc.values();
    tc.plant.heat_capacity_j_per_k =
        doc.get_double("heat_capacity_j_per_k", 500.0);
    tc.plant.conductance_w_per_k =
        doc.get_double("conductance_w_per_k", 0.056);
    tc.plant.bath_t_k = doc.get_double("bath_t_k", 77.0);
    tc.plant.heater_max_w = doc.get_double("heater_max_w", 12.0);
    tc.plant.sensor_noise_k = doc.get_double("sensor_noise_k", 0.0);
    tc.pid.kp = doc.get_double("kp");
    tc.pid.ki = doc.get_double("ki", 0.0);
    tc.pid.kd = doc.get_double("kd", 0.0);
    tc.pid.sample_period_s = doc.get_double("pid_period_s", 0.1);
    tc.pid.output_max_w = tc.plant.heater_max_w;
    if (doc.has("setpoint_k")) {
        tc.setpoint_k = doc.get_double("setpoint_k");
    } else {
        tc.setpoint_k = doc.get_double("setpoint_c") + 273.15;
    }
    tc.start_t_k = doc.get_double("start_t_k", 293.0);
    tc.duration_s = doc.get_double("duration_s", 7200.0);
    tc.dt_s = doc.get_double("dt_s", 0.1);
    tc.settle_band_k = doc.get_double("settle_band_k", 0.05);
    tc.parasitic_w = doc.get_double("parasitic_w", 0.0);
    tc.fill_kg = doc.get_double("fill_kg", 14.4);
    tc.seed = doc.get_uint("seed", 1);
    doc.finish();
    tc.plant.check();
    return tc;
}

}
