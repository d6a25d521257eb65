#include "clicklab/report.hpp"

#include <fstream>

#include "clicklab/errors.hpp"
#include "clicklab/version.hpp"

namespace clicklab {

using nlohmann::json;

json report_envelope(const std::string& experiment, std::uint64_t seed,
                     const std::map<std::string, std::string>& resolved) {
    json j;
    j["tool"] = {{"name", toolkit_name}, {"version", toolkit_version}};
    j["experiment"] = experiment;
    j["seed"] = seed;
    j["config"] = resolved;
    return j;
}

json to_json(const RateEstimate& r) {
    return {{"hz", r.hz}, {"err_hz", r.err_hz}};
}

json to_json(const ValueWithError& v) {
    return {{"value", v.value}, {"err", v.err}};
}

json to_json(const ProbabilityEstimate& p, TimestampPs window_ps) {
    return {{"window_ps", window_ps},
            {"probability", p.value},
            {"err", p.err},
            {"trials", p.trials}};
}

json to_json(const StreamAnalysis& a) {
    json raw = {{"count", a.raw.size()}, {"rate", to_json(a.raw_rate)}};
    if (a.raw_window_ps > 0)
        raw["afterpulse"] = to_json(a.raw_afterpulse, a.raw_window_ps);
    json post = {{"block_ps", a.block_ps},
                 {"count", a.kept.size()},
                 {"rate", to_json(a.post_rate)}};
    if (a.post_window_ps > 0)
        post["afterpulse"] = to_json(a.post_afterpulse, a.post_window_ps);
    return {{"raw", raw}, {"post", post}};
}

json to_json(const CwCharacterization& c) {
    json j;
    j["photon_rate_hz"] = c.photon_rate_hz;
    j["lit"] = to_json(c.lit);
    j["dark"] = to_json(c.dark);
    j["efficiency"] = to_json(c.efficiency);
    j["nep_w_per_sqrt_hz"] = c.nep_w_per_sqrt_hz;
    return j;
}

namespace {

json arm_json(const PdcArm& arm, bool gated) {
    json j = to_json(arm.stream);
    if (gated) {
        j["gate"] = {{"offset_ps", arm.gate.offset_ps},
                     {"width_ps", arm.gate.width_ps},
                     {"period_ps", arm.gate.period_ps}};
    }
    json sel = {{"count", arm.selected.size()},
                {"rate", to_json(arm.singles)}};
    if (arm.afterpulse_window_ps > 0)
        sel["afterpulse"] =
            to_json(arm.afterpulse, arm.afterpulse_window_ps);
    j["selected"] = sel;
    return j;
}

json coincidence_json(const CoincidenceResult& c) {
    return {{"offset_ps", c.offset_ps},
            {"window_ps", c.window_ps},
            {"count", c.count},
            {"rate", to_json(c.rate)}};
}

}  // namespace

json to_json(const PdcExperiment& p, bool gated) {
    json j;
    j["pulse_period_ps"] = p.pulse_period_ps;
    j["sync"] = {{"count", p.sync.size()}, {"rate_hz", p.sync.rate_hz()}};
    j["signal"] = arm_json(p.signal, gated);
    j["idler"] = arm_json(p.idler, gated);
    json raw = coincidence_json(p.raw_coincidences);
    raw["window_pairs"] = p.raw_window_pairs;
    j["raw_coincidences"] = raw;
    j["coincidences"] = coincidence_json(p.coincidences);
    j["accidentals_hz"] = to_json(p.accidentals);
    j["car"] = to_json(p.car);
    j["klyshko"] = {{"signal", to_json(p.klyshko.signal)},
                    {"idler", to_json(p.klyshko.idler)}};
    return j;
}

json to_json(const ControlRunSummary& s) {
    return {{"settled", s.settled},
            {"settling_time_s", s.settling_time_s},
            {"steady_mean_t_k", s.steady_mean_t_k},
            {"steady_peak_to_peak_k", s.steady_peak_to_peak_k},
            {"steady_mean_power_w", s.steady_mean_power_w}};
}

json to_json(const Ln2Budget& b) {
    return {{"boiloff_w", b.boiloff_w},
            {"evaporation_g_per_h", b.evaporation_g_per_h},
            {"endurance_h", b.endurance_h}};
}

namespace {

void flatten(const json& node, const std::string& prefix, std::string& out) {
    if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            flatten(it.value(),
                    prefix.empty() ? it.key() : prefix + "." + it.key(), out);
        }
    } else if (node.is_array()) {
        for (std::size_t i = 0; i < node.size(); ++i)
            flatten(node[i], prefix + "." + std::to_string(i), out);
    } else {
        out += prefix;
        out += ',';
        out += node.dump();
        out += '\n';
    }
}

}  // namespace

std::string report_to_csv(const json& report) {
    std::string out = "#clicklab-report v1\n";
    flatten(report, "", out);
    return out;
}

ReportFormat parse_report_format(const std::string& text) {
    if (text == "json") return ReportFormat::json;
    if (text == "csv") return ReportFormat::csv;
    throw ConfigError("unknown report format '" + text +
                      "' (expected json or csv)");
}

std::string render_report(const json& report, ReportFormat format) {
    if (format == ReportFormat::csv) return report_to_csv(report);
    return report.dump(2) + "\n";
}

void write_report(const std::filesystem::path& path, const json& report,
                  ReportFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw AnalysisError("cannot open report file " + path.string());
    out << render_report(report, format);
    if (!out) throw AnalysisError("failed writing report " + path.string());
}

}
