// clicklab: click stream simulator and time-tag analysis tool.
//
// Every subcommand is a pure function of its config file and seed: running
// it twice writes byte-identical outputs.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clicklab/config.hpp"
#include "clicklab/errors.hpp"
#include "clicklab/filters.hpp"
#include "clicklab/metrics.hpp"
#include "clicklab/pairs.hpp"
#include "clicklab/pipeline.hpp"
#include "clicklab/report.hpp"
#include "clicklab/rng.hpp"
#include "clicklab/simkit.hpp"
#include "clicklab/thermo.hpp"
#include "clicklab/timetag.hpp"
#include "clicklab/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace clicklab;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

fs::path prep_outdir(const std::string& dir) {
    fs::path p{dir};
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec)
        throw ConfigError("cannot create output directory " + p.string() +
                          ": " + ec.message());
    return p;
}

TagFormat parse_tag_format(const std::string& text) {
    if (text == "csv") return TagFormat::csv;
    if (text == "bin") return TagFormat::binary;
    throw ConfigError("unknown tag format '" + text +
                      "' (expected csv or bin)");
}

const char* tag_ext(TagFormat f) {
    return f == TagFormat::csv ? ".csv" : ".clk";
}

const char* report_name(ReportFormat f) {
    return f == ReportFormat::json ? "report.json" : "report.csv";
}

const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::dark: return "dark";
        case ExperimentKind::cw: return "cw";
        case ExperimentKind::pdc: return "pdc";
    }
    return "?";
}

void note_written(const fs::path& p) { std::printf("wrote %s\n", p.c_str()); }

void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

void write_trace_csv(const fs::path& path,
                     const std::vector<ControlTracePoint>& trace) {
    std::string text = "t_s,temperature_k,power_w\n";
    text.reserve(text.size() + trace.size() * 40);
    for (const auto& p : trace) {
        append_double(text, p.t_s);
        text += ',';
        append_double(text, p.temperature_k);
        text += ',';
        append_double(text, p.power_w);
        text += '\n';
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw AnalysisError("cannot open " + path.string());
    out << text;
    if (!out) throw AnalysisError("failed writing " + path.string());
}

// Options shared by the config-driven subcommands.
struct RunOpts {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    std::string format = "json";

    void attach(CLI::App* cmd, bool with_format = true) {
        cmd->add_option("--config", config, "run configuration file")
            ->required();
        cmd->add_option("--out", out, "output directory")->required();
        seed_opt = cmd->add_option("--seed", seed,
                                   "override the seed from the config");
        if (with_format)
            cmd->add_option("--format", format, "report format")
                ->check(CLI::IsMember({"csv", "json"}));
    }

    RunConfig load() const {
        RunConfig rc = load_run_config(config);
        if (seed_opt->count() > 0) rc.seed = seed;
        return rc;
    }
};

json file_entry(const fs::path& name, std::uint64_t count) {
    return {{"path", name.string()}, {"count", count}};
}

TagRun single_channel_run(ChannelStream s,
                          std::map<std::string, std::string> metadata) {
    TagRun run;
    run.duration_ps = s.duration_ps;
    run.metadata = std::move(metadata);
    if (!s.empty()) run.add(std::move(s));
    return run;
}

void cmd_simulate(const RunOpts& opts, const std::string& tags_format) {
    RunConfig rc = opts.load();
    TagFormat tf = parse_tag_format(tags_format);
    ReportFormat rf = parse_report_format(opts.format);
    fs::path outdir = prep_outdir(opts.out);

    std::map<std::string, std::string> meta{
        {"experiment", kind_name(rc.experiment)},
        {"seed", std::to_string(rc.seed)},
    };
    json files;

    auto emit = [&](const char* stem, ChannelStream s) {
        fs::path p = outdir / (stem + std::string(tag_ext(tf)));
        std::uint64_t n = s.size();
        write_tags(single_channel_run(std::move(s), meta), p, tf);
        files[stem] = file_entry(p.filename(), n);
        std::printf("wrote %s (%llu tags)\n", p.c_str(),
                    static_cast<unsigned long long>(n));
    };

    switch (rc.experiment) {
        case ExperimentKind::dark: {
            DetectorModel det = load_detector_model(rc.detector_path);
            DetectionSettings st{rc.temperature_c,
                                 rc.wavelength_nm.value_or(0.0),
                                 rc.bias_label};
            ChannelStream none{signal_channel, rc.duration_ps, {}};
            emit("tags", detect(none, det, st, derive_seed(rc.seed, 1)));
            break;
        }
        case ExperimentKind::cw: {
            CwSourceModel src = load_cw_source(rc.source_path);
            if (rc.wavelength_nm) src.wavelength_nm = *rc.wavelength_nm;
            DetectorModel det = load_detector_model(rc.detector_path);
            DetectionSettings st{rc.temperature_c, src.wavelength_nm,
                                 rc.bias_label};
            ChannelStream photons = photon_arrivals_cw(
                src, rc.duration_ps, derive_seed(rc.seed, 0));
            emit("tags", detect(photons, det, st, derive_seed(rc.seed, 1)));
            break;
        }
        case ExperimentKind::pdc: {
            PdcSourceModel src = load_pdc_source(rc.source_path);
            DetectorModel det_s =
                load_detector_model(rc.detector_signal_path);
            DetectorModel det_i = load_detector_model(rc.detector_idler_path);
            PdcStreams ph =
                simulate_pdc(src, rc.duration_ps, derive_seed(rc.seed, 0));
            DetectionSettings st_s{
                rc.temperature_c,
                rc.wavelength_nm.value_or(src.wavelength_signal_nm),
                rc.bias_label};
            DetectionSettings st_i{
                rc.temperature_c,
                rc.wavelength_nm.value_or(src.wavelength_idler_nm),
                rc.bias_label};
            emit("sync", std::move(ph.sync));
            emit("signal", detect(ph.signal, det_s, st_s,
                                  derive_seed(rc.seed, 1)));
            emit("idler", detect(ph.idler, det_i, st_i,
                                 derive_seed(rc.seed, 2)));
            break;
        }
    }

    json rep = report_envelope(kind_name(rc.experiment), rc.seed,
                               rc.raw_values);
    rep["files"] = files;
    fs::path mp = outdir / (rf == ReportFormat::json ? "metadata.json"
                                                     : "metadata.csv");
    write_report(mp, rep, rf);
    note_written(mp);
}

void print_stream_lines(const char* label, const StreamAnalysis& a) {
    std::printf("%s raw: %llu tags, %s Hz\n", label,
                static_cast<unsigned long long>(a.raw.size()),
                fmt(a.raw_rate.hz).c_str());
    std::printf("%s blocking: %lld ps, kept %llu tags, %s Hz\n", label,
                static_cast<long long>(a.block_ps),
                static_cast<unsigned long long>(a.kept.size()),
                fmt(a.post_rate.hz).c_str());
    if (a.raw_window_ps > 0)
        std::printf("%s afterpulse raw: %s +- %s (window %lld ps)\n", label,
                    fmt(a.raw_afterpulse.value).c_str(),
                    fmt(a.raw_afterpulse.err).c_str(),
                    static_cast<long long>(a.raw_window_ps));
    if (a.post_window_ps > 0)
        std::printf("%s afterpulse post: %s +- %s (window %lld ps)\n", label,
                    fmt(a.post_afterpulse.value).c_str(),
                    fmt(a.post_afterpulse.err).c_str(),
                    static_cast<long long>(a.post_window_ps));
}

void cmd_characterize(const RunOpts& opts) {
    RunConfig rc = opts.load();
    ReportFormat rf = parse_report_format(opts.format);
    fs::path outdir = prep_outdir(opts.out);

    json rep = report_envelope(kind_name(rc.experiment), rc.seed,
                               rc.raw_values);

    auto write_hists = [&](const char* prefix, const StreamAnalysis& a) {
        fs::path raw = outdir / (std::string(prefix) + "inter_event_raw.csv");
        a.inter_event.write_csv(raw);
        note_written(raw);
        Histogram post = inter_event_histogram(a.kept, rc.hist_bin_ps,
                                               rc.hist_max_delay_ps);
        fs::path kept =
            outdir / (std::string(prefix) + "inter_event_post.csv");
        post.write_csv(kept);
        note_written(kept);
    };

    switch (rc.experiment) {
        case ExperimentKind::dark: {
            StreamAnalysis a = run_dark(rc);
            rep["result"] = to_json(a);
            print_stream_lines("dark", a);
            write_hists("", a);
            break;
        }
        case ExperimentKind::cw: {
            CwCharacterization c = run_cw(rc);
            rep["result"] = to_json(c);
            print_stream_lines("lit", c.lit);
            print_stream_lines("dark", c.dark);
            std::printf("efficiency: %s +- %s\n",
                        fmt(c.efficiency.value).c_str(),
                        fmt(c.efficiency.err).c_str());
            std::printf("nep: %s W/sqrt(Hz)\n",
                        fmt(c.nep_w_per_sqrt_hz).c_str());
            write_hists("lit_", c.lit);
            fs::path dark_hist = outdir / "dark_inter_event_raw.csv";
            c.dark.inter_event.write_csv(dark_hist);
            note_written(dark_hist);
            break;
        }
        case ExperimentKind::pdc:
            throw ConfigError(
                "characterize expects a dark or cw run config; use the pdc "
                "subcommand for pair experiments");
    }

    fs::path rp = outdir / report_name(rf);
    write_report(rp, rep, rf);
    note_written(rp);
}

void cmd_pdc(const RunOpts& opts) {
    RunConfig rc = opts.load();
    if (rc.experiment != ExperimentKind::pdc)
        throw ConfigError("pdc expects a run config with experiment = pdc");
    ReportFormat rf = parse_report_format(opts.format);
    fs::path outdir = prep_outdir(opts.out);

    PdcExperiment p = run_pdc(rc);

    json rep = report_envelope("pdc", rc.seed, rc.raw_values);
    rep["result"] = to_json(p, rc.gate.mode != GateSetting::Mode::off);

    double dur_s = static_cast<double>(rc.duration_ps) * 1e-12;
    std::printf("sync: %llu tags\n",
                static_cast<unsigned long long>(p.sync.size()));
    std::printf("singles signal: %s +- %s Hz\n", fmt(p.signal.singles.hz).c_str(),
                fmt(p.signal.singles.err_hz).c_str());
    std::printf("singles idler: %s +- %s Hz\n", fmt(p.idler.singles.hz).c_str(),
                fmt(p.idler.singles.err_hz).c_str());
    std::printf("coincidences: %s +- %s Hz (%llu in %s s)\n",
                fmt(p.coincidences.rate.hz).c_str(),
                fmt(p.coincidences.rate.err_hz).c_str(),
                static_cast<unsigned long long>(p.coincidences.count),
                fmt(dur_s).c_str());
    std::printf("accidentals: %s +- %s Hz\n", fmt(p.accidentals.value).c_str(),
                fmt(p.accidentals.err).c_str());
    std::printf("car: %s +- %s\n", fmt(p.car.value).c_str(),
                fmt(p.car.err).c_str());
    std::printf("klyshko signal: %s +- %s\n", fmt(p.klyshko.signal.value).c_str(),
                fmt(p.klyshko.signal.err).c_str());
    std::printf("klyshko idler: %s +- %s\n", fmt(p.klyshko.idler.value).c_str(),
                fmt(p.klyshko.idler.err).c_str());

    fs::path xs = outdir / "xcorr_selected.csv";
    p.xcorr.write_csv(xs);
    note_written(xs);
    Histogram raw_xc = cross_correlation_histogram(
        p.signal.stream.raw, p.idler.stream.raw, rc.xcorr_bin_ps,
        rc.xcorr_range_ps);
    fs::path xr = outdir / "xcorr_raw.csv";
    raw_xc.write_csv(xr);
    note_written(xr);
    const struct {
        const char* name;
        const PdcArm* arm;
    } arms[] = {{"signal", &p.signal}, {"idler", &p.idler}};
    for (const auto& [name, arm] : arms) {
        fs::path ie = outdir / ("inter_event_" + std::string(name) + ".csv");
        arm->stream.inter_event.write_csv(ie);
        note_written(ie);
        Histogram fold =
            folded_sync_histogram(arm->stream.kept, p.sync,
                                  rc.sync_hist_bin_ps, p.pulse_period_ps);
        fs::path fp = outdir / ("sync_fold_" + std::string(name) + ".csv");
        fold.write_csv(fp);
        note_written(fp);
    }

    fs::path rp = outdir / report_name(rf);
    write_report(rp, rep, rf);
    note_written(rp);
}

void cmd_thermo(const RunOpts& opts) {
    ThermoConfig tc = load_thermo_config(opts.config);
    if (opts.seed_opt->count() > 0) tc.seed = opts.seed;
    ReportFormat rf = parse_report_format(opts.format);
    fs::path outdir = prep_outdir(opts.out);

    ControlRunResult res = simulate_control_run(
        tc.plant, tc.pid, tc.setpoint_k, tc.start_t_k, tc.duration_s, tc.dt_s,
        tc.seed, tc.settle_band_k);
    Ln2Budget budget =
        ln2_budget(tc.plant, tc.setpoint_k, tc.parasitic_w, tc.fill_kg);

    json rep = report_envelope("thermo", tc.seed, tc.raw_values);
    rep["result"] = {
        {"control", to_json(res.summary)},
        {"ln2", to_json(budget)},
        {"steady_power_w",
         tc.plant.conductance_w_per_k * (tc.setpoint_k - tc.plant.bath_t_k)},
    };

    std::printf("settled: %s\n", res.summary.settled ? "yes" : "no");
    std::printf("settling time: %s s\n",
                fmt(res.summary.settling_time_s).c_str());
    std::printf("steady mean: %s K (peak to peak %s K)\n",
                fmt(res.summary.steady_mean_t_k).c_str(),
                fmt(res.summary.steady_peak_to_peak_k).c_str());
    std::printf("steady power: %s W\n",
                fmt(res.summary.steady_mean_power_w).c_str());
    std::printf("ln2: %s g/h, endurance %s h\n",
                fmt(budget.evaporation_g_per_h).c_str(),
                fmt(budget.endurance_h).c_str());

    fs::path tp = outdir / "trace.csv";
    write_trace_csv(tp, res.trace);
    note_written(tp);
    fs::path rp = outdir / report_name(rf);
    write_report(rp, rep, rf);
    note_written(rp);
}

struct FilterOpts {
    std::string in;
    std::string out;
    std::string format = "json";
    std::string tags_format = "csv";
    std::string block = "off";
    std::string gate = "off";
    TimestampPs gate_width = 1300;
    TimestampPs gate_period = 0;
    std::uint8_t sync_ch = 0;
    double residual = 0.1;
    TimestampPs hist_bin = 500'000;
    TimestampPs hist_max = 20'000'000;
    TimestampPs sync_hist_bin = 50;
};

void cmd_filter(const FilterOpts& o) {
    TagFormat tf = parse_tag_format(o.tags_format);
    ReportFormat rf = parse_report_format(o.format);
    BlockingSetting bs = BlockingSetting::parse(o.block);
    GateSetting gs = GateSetting::parse(o.gate, o.gate_width);
    fs::path outdir = prep_outdir(o.out);

    TagRun run = read_tags(o.in);
    const ChannelStream* sync = nullptr;
    if (gs.mode != GateSetting::Mode::off) {
        if (!run.has_channel(o.sync_ch))
            throw AnalysisError("gating requested but sync channel " +
                                std::to_string(o.sync_ch) + " is not in " +
                                o.in);
        sync = &run.channel(o.sync_ch);
    }

    TagRun out_run;
    out_run.duration_ps = run.duration_ps;
    out_run.metadata = run.metadata;
    out_run.metadata["filter_block"] = bs.describe();
    out_run.metadata["filter_gate"] = gs.describe();

    std::map<std::string, std::string> flags{
        {"in", o.in},
        {"block", bs.describe()},
        {"gate", gs.describe()},
        {"gate_width_ps", std::to_string(o.gate_width)},
        {"gate_period_ps", std::to_string(o.gate_period)},
        {"sync_channel", std::to_string(o.sync_ch)},
        {"residual_target", fmt(o.residual)},
    };
    json rep = report_envelope("filter", 0, flags);
    rep.erase("seed");
    json channels;

    for (const auto& [ch, s] : run.streams) {
        std::string key = std::to_string(ch);
        if (sync && ch == o.sync_ch) {
            out_run.add(s);
            channels[key] = {{"sync", true}, {"count", s.size()}};
            continue;
        }
        TimestampPs block_ps = 0;
        if (bs.mode == BlockingSetting::Mode::fixed) {
            block_ps = bs.block_ps;
        } else if (bs.mode == BlockingSetting::Mode::automatic) {
            block_ps = choose_blocking_time(
                inter_event_histogram(s, o.hist_bin, o.hist_max), o.residual);
        }
        ChannelStream kept = blocking_filter(s, block_ps);
        json entry = {{"raw_count", s.size()}, {"block_ps", block_ps}};
        if (sync) {
            TimestampPs offset = gs.offset_ps;
            if (gs.mode == GateSetting::Mode::automatic) {
                Histogram h =
                    o.gate_period > 0
                        ? folded_sync_histogram(kept, *sync, o.sync_hist_bin,
                                                o.gate_period)
                        : sync_delay_histogram(kept, *sync, o.sync_hist_bin);
                offset = suggest_gate_offset(h);
            }
            GateConfig gc{offset, gs.width_ps, o.gate_period};
            kept = time_gate(kept, *sync, gc);
            entry["gate"] = {{"offset_ps", gc.offset_ps},
                             {"width_ps", gc.width_ps},
                             {"period_ps", gc.period_ps}};
        }
        entry["kept_count"] = kept.size();
        channels[key] = entry;
        std::printf("channel %s: %llu -> %llu tags\n", key.c_str(),
                    static_cast<unsigned long long>(s.size()),
                    static_cast<unsigned long long>(kept.size()));
        if (!kept.empty()) out_run.add(std::move(kept));
    }
    rep["channels"] = channels;

    fs::path fp = outdir / ("filtered" + std::string(tag_ext(tf)));
    write_tags(out_run, fp, tf);
    note_written(fp);
    fs::path rp = outdir / report_name(rf);
    write_report(rp, rep, rf);
    note_written(rp);
}

struct HistOpts {
    std::string in;
    std::string out;
    std::string kind;
    std::uint8_t channel = 1;
    std::uint8_t channel_b = 2;
    std::uint8_t sync_ch = 0;
    TimestampPs bin = 0;  // 0 picks the per-kind default
    TimestampPs max_delay = 0;
    TimestampPs range = 5000;
    std::string pairing = "all";
    TimestampPs fold = 0;
};

void cmd_hist(const HistOpts& o) {
    fs::path outdir = prep_outdir(o.out);
    TagRun run = read_tags(o.in);

    auto need = [&](std::uint8_t ch) -> const ChannelStream& {
        if (!run.has_channel(ch))
            throw AnalysisError("channel " + std::to_string(ch) +
                                " is not in " + o.in);
        return run.channel(ch);
    };

    Histogram h{1, 0, 1};
    if (o.kind == "inter") {
        DelayPairing pairing = o.pairing == "next"
                                   ? DelayPairing::next_event_only
                                   : DelayPairing::all_within_window;
        h = inter_event_histogram(need(o.channel),
                                  o.bin > 0 ? o.bin : 500'000,
                                  o.max_delay > 0 ? o.max_delay : 20'000'000,
                                  pairing);
    } else if (o.kind == "sync") {
        TimestampPs bin = o.bin > 0 ? o.bin : 50;
        h = o.fold > 0
                ? folded_sync_histogram(need(o.channel), need(o.sync_ch), bin,
                                        o.fold)
                : sync_delay_histogram(need(o.channel), need(o.sync_ch), bin,
                                       o.max_delay);
    } else if (o.kind == "xcorr") {
        h = cross_correlation_histogram(need(o.channel), need(o.channel_b),
                                        o.bin > 0 ? o.bin : 100, o.range);
    } else {
        throw ConfigError("unknown histogram kind '" + o.kind +
                          "' (expected inter, sync or xcorr)");
    }

    fs::path hp = outdir / "hist.csv";
    h.write_csv(hp);
    std::printf("wrote %s (%llu entries in %llu bins)\n", hp.c_str(),
                static_cast<unsigned long long>(h.total_in()),
                static_cast<unsigned long long>(h.bin_count()));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"click stream simulator and time-tag analysis toolkit"};
    app.set_version_flag("--version", toolkit_version);
    app.require_subcommand(1);

    RunOpts sim_opts;
    std::string sim_tags_format = "csv";
    CLI::App* sim = app.add_subcommand(
        "simulate", "generate tag files from a run config");
    sim_opts.attach(sim);
    sim->add_option("--tags-format", sim_tags_format,
                    "tag file format (csv or bin)")
        ->check(CLI::IsMember({"csv", "bin"}));
    sim->callback([&] { cmd_simulate(sim_opts, sim_tags_format); });

    RunOpts chr_opts;
    CLI::App* chr = app.add_subcommand(
        "characterize",
        "dark and efficiency characterization of one detector");
    chr_opts.attach(chr);
    chr->callback([&] { cmd_characterize(chr_opts); });

    RunOpts pdc_opts;
    CLI::App* pdc = app.add_subcommand(
        "pdc", "photon pair source experiment with two detectors");
    pdc_opts.attach(pdc);
    pdc->callback([&] { cmd_pdc(pdc_opts); });

    RunOpts th_opts;
    CLI::App* th = app.add_subcommand(
        "thermo", "closed-loop temperature control simulation");
    th_opts.attach(th);
    th->callback([&] { cmd_thermo(th_opts); });

    FilterOpts f_opts;
    CLI::App* flt = app.add_subcommand(
        "filter", "apply blocking and gating to an existing tag file");
    flt->add_option("--in", f_opts.in, "input tag file")->required();
    flt->add_option("--out", f_opts.out, "output directory")->required();
    flt->add_option("--format", f_opts.format, "report format")
        ->check(CLI::IsMember({"csv", "json"}));
    flt->add_option("--tags-format", f_opts.tags_format,
                    "tag file format (csv or bin)")
        ->check(CLI::IsMember({"csv", "bin"}));
    flt->add_option("--block", f_opts.block,
                    "blocking time in ps, or auto/off");
    flt->add_option("--gate", f_opts.gate,
                    "gate offset in ps, or auto/off");
    flt->add_option("--gate-width", f_opts.gate_width, "gate width in ps");
    flt->add_option("--gate-period", f_opts.gate_period,
                    "fold gate delays at this period in ps (0: one gate "
                    "per sync tag)");
    flt->add_option("--sync-channel", f_opts.sync_ch, "sync channel number");
    flt->add_option("--residual-target", f_opts.residual,
                    "afterpulse residual accepted by auto blocking");
    flt->callback([&] { cmd_filter(f_opts); });

    HistOpts h_opts;
    CLI::App* hst = app.add_subcommand(
        "hist", "histogram a tag file (inter-event, sync delay or cross-"
                "correlation)");
    hst->add_option("--in", h_opts.in, "input tag file")->required();
    hst->add_option("--out", h_opts.out, "output directory")->required();
    hst->add_option("--kind", h_opts.kind, "inter, sync or xcorr")
        ->required();
    hst->add_option("--channel", h_opts.channel, "channel to histogram");
    hst->add_option("--channel-b", h_opts.channel_b,
                    "second channel (xcorr)");
    hst->add_option("--sync-channel", h_opts.sync_ch,
                    "sync channel (sync kind)");
    hst->add_option("--bin", h_opts.bin, "bin width in ps");
    hst->add_option("--max", h_opts.max_delay, "largest delay in ps");
    hst->add_option("--range", h_opts.range, "correlation range in ps");
    hst->add_option("--pairing", h_opts.pairing,
                    "inter-event pairing: all or next")
        ->check(CLI::IsMember({"all", "next"}));
    hst->add_option("--fold", h_opts.fold,
                    "fold sync delays at this period in ps");
    hst->callback([&] { cmd_hist(h_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const AnalysisError& e) {
        std::fprintf(stderr, "analysis error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
