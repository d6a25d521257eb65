#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "clicklab/config.hpp"
#include "clicklab/pipeline.hpp"
#include "clicklab/thermo.hpp"

namespace clicklab {

// Reports carry the tool version, the resolved configuration and the
// results, and nothing that varies between identical runs: the same binary
// on the same inputs writes the same bytes.

nlohmann::json report_envelope(const std::string& experiment,
                               std::uint64_t seed,
                               const std::map<std::string, std::string>&
                                   resolved_config);

nlohmann::json to_json(const RateEstimate& r);
nlohmann::json to_json(const ValueWithError& v);
nlohmann::json to_json(const ProbabilityEstimate& p, TimestampPs window_ps);
nlohmann::json to_json(const StreamAnalysis& a);
nlohmann::json to_json(const CwCharacterization& c);
nlohmann::json to_json(const PdcExperiment& p, bool gated);
nlohmann::json to_json(const ControlRunSummary& s);
nlohmann::json to_json(const Ln2Budget& b);

// key,value rows, one per scalar leaf, nested keys joined with '.'. Values
// are JSON-encoded so strings stay unambiguous.
std::string report_to_csv(const nlohmann::json& report);

// Pretty JSON plus trailing newline, or the CSV flattening above.
enum class ReportFormat { json, csv };
ReportFormat parse_report_format(const std::string& text);
void write_report(const std::filesystem::path& path,
                  const nlohmann::json& report, ReportFormat format);
std::string render_report(const nlohmann::json& report, ReportFormat format);

}
