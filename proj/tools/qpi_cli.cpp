// Command-line front end; talks to the library exclusively through the
// public C interface.

#include "qpi/qpi.h"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

int die(const std::string& msg)
{
    std::cerr << "qpi: " << msg << "\n";
    return 1;
}

int die_last()
{
    return die(qpi_last_error());
}

struct MapDeleter {
    void operator()(qpi_map* m) const { qpi_map_destroy(m); }
};
struct ConfigDeleter {
    void operator()(qpi_config* c) const { qpi_config_destroy(c); }
};
struct RecoveryDeleter {
    void operator()(qpi_recovery* r) const { qpi_recovery_destroy(r); }
};
struct TraceDeleter {
    void operator()(qpi_trace* t) const { qpi_trace_destroy(t); }
};
using MapPtr = std::unique_ptr<qpi_map, MapDeleter>;
using ConfigPtr = std::unique_ptr<qpi_config, ConfigDeleter>;
using RecoveryPtr = std::unique_ptr<qpi_recovery, RecoveryDeleter>;
using TracePtr = std::unique_ptr<qpi_trace, TraceDeleter>;

MapPtr read_map_auto(const std::string& path, int* err)
{
    qpi_map* raw = nullptr;
    const bool pfm = path.size() >= 4 && path.compare(path.size() - 4, 4, ".pfm") == 0;
    const qpi_status st =
        pfm ? qpi_map_read_pfm(path.c_str(), &raw) : qpi_map_read_pgm16(path.c_str(), &raw);
    if (st != QPI_OK) {
        *err = 1;
        return nullptr;
    }
    return MapPtr(raw);
}

bool ensure_out_dir(const std::string& dir, std::string* msg)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        *msg = "cannot create output directory " + dir + ": " + ec.message();
        return false;
    }
    return true;
}

// Builds a config from an optional file plus explicit "key = value"
// assignments accumulated from flags, in command-line order.
ConfigPtr build_config(const std::string& config_path,
                       const std::vector<std::pair<std::string, std::string>>& assignments,
                       int* err)
{
    qpi_config* raw = nullptr;
    const qpi_status st = config_path.empty() ? qpi_config_create(&raw)
                                              : qpi_config_load(config_path.c_str(), &raw);
    if (st != QPI_OK) {
        *err = 1;
        return nullptr;
    }
    ConfigPtr cfg(raw);
    for (const auto& [key, value] : assignments) {
        if (qpi_config_set(cfg.get(), key.c_str(), value.c_str()) != QPI_OK) {
            *err = 1;
            return nullptr;
        }
    }
    return cfg;
}

// Registers a flag that maps straight onto a config key.
void add_config_flag(CLI::App* cmd, std::vector<std::pair<std::string, std::string>>* sink,
                     const std::string& flag, const std::string& key, const std::string& desc)
{
    cmd->add_option_function<std::string>(
        flag, [sink, key](const std::string& v) { sink->emplace_back(key, v); }, desc);
}

int run_genobject(const std::string& config_path,
                  const std::vector<std::pair<std::string, std::string>>& assignments,
                  const std::string& out_dir)
{
    int err = 0;
    ConfigPtr cfg = build_config(config_path, assignments, &err);
    if (err)
        return die_last();

    qpi_map* amp_raw = nullptr;
    qpi_map* phase_raw = nullptr;
    if (qpi_generate_object(cfg.get(), &amp_raw, &phase_raw) != QPI_OK)
        return die_last();
    MapPtr amp(amp_raw), phase(phase_raw);

    std::string msg;
    if (!ensure_out_dir(out_dir, &msg))
        return die(msg);
    if (qpi_map_write_pfm(amp.get(), (out_dir + "/amplitude.pfm").c_str()) != QPI_OK)
        return die_last();
    if (qpi_map_write_pfm(phase.get(), (out_dir + "/phase.pfm").c_str()) != QPI_OK)
        return die_last();
    std::cout << out_dir << "/amplitude.pfm " << out_dir << "/phase.pfm\n";
    return 0;
}

int run_simulate(const std::string& config_path,
                 const std::vector<std::pair<std::string, std::string>>& assignments,
                 std::string out_dir)
{
    int err = 0;
    ConfigPtr cfg = build_config(config_path, assignments, &err);
    if (err)
        return die_last();

    if (out_dir.empty()) {
        char* configured = nullptr;
        if (qpi_config_get(cfg.get(), "output_dir", &configured) != QPI_OK)
            return die_last();
        out_dir = configured;
        qpi_string_free(configured);
    }
    std::string msg;
    if (!ensure_out_dir(out_dir, &msg))
        return die(msg);

    qpi_map* amp_raw = nullptr;
    qpi_map* phase_raw = nullptr;
    if (qpi_generate_object(cfg.get(), &amp_raw, &phase_raw) != QPI_OK)
        return die_last();
    MapPtr amp(amp_raw), phase(phase_raw);

    qpi_map* i1_raw = nullptr;
    qpi_map* i2_raw = nullptr;
    qpi_map* i3_raw = nullptr;
    if (qpi_simulate(cfg.get(), amp.get(), phase.get(), &i1_raw, &i2_raw, &i3_raw) != QPI_OK)
        return die_last();
    MapPtr i1(i1_raw), i2(i2_raw), i3(i3_raw);

    if (qpi_map_write_pgm16(i1.get(), (out_dir + "/i1.pgm").c_str()) != QPI_OK
        || qpi_map_write_pgm16(i2.get(), (out_dir + "/i2.pgm").c_str()) != QPI_OK
        || qpi_map_write_pgm16(i3.get(), (out_dir + "/i3.pgm").c_str()) != QPI_OK)
        return die_last();
    if (qpi_map_write_pfm(amp.get(), (out_dir + "/truth_amplitude.pfm").c_str()) != QPI_OK
        || qpi_map_write_pfm(phase.get(), (out_dir + "/truth_phase.pfm").c_str()) != QPI_OK)
        return die_last();
    if (qpi_config_save(cfg.get(), (out_dir + "/config.txt").c_str()) != QPI_OK)
        return die_last();
    std::cout << out_dir << "/i1.pgm " << out_dir << "/i2.pgm " << out_dir << "/i3.pgm\n";
    return 0;
}

int run_recover(const std::string& i1_path, const std::string& i2_path,
                const std::string& i3_path, const std::string& shifts_arg,
                const std::string& window_arg, int pad, const std::string& kmode,
                int iters, double tol, const std::string& truth_path,
                const std::string& out_dir)
{
    qpi_recover_params params;
    qpi_recover_params_init(&params);

    int consumed = 0;
    if (std::sscanf(shifts_arg.c_str(), "%lf,%lf,%lf%n", &params.t1, &params.t2, &params.t3,
                    &consumed) != 3
        || shifts_arg.c_str()[consumed] != '\0')
        return die("--shifts expects t1,t2,t3 in radians, got '" + shifts_arg + "'");
    if (qpi_window_parse(window_arg.c_str(), &params.window_w, &params.window_h,
                         &params.window_dx, &params.window_dy) != QPI_OK)
        return die_last();
    if (kmode != "combined" && kmode != "zero")
        return die("--kmode must be 'combined' or 'zero', got '" + kmode + "'");
    params.kmode = kmode == "zero" ? 1 : 0;
    params.pad_factor = pad;
    params.max_iters = iters;
    params.self_residual_tol = tol;

    int err = 0;
    MapPtr i1 = read_map_auto(i1_path, &err);
    MapPtr i2 = err ? nullptr : read_map_auto(i2_path, &err);
    MapPtr i3 = err ? nullptr : read_map_auto(i3_path, &err);
    if (err)
        return die_last();
    MapPtr truth;
    if (!truth_path.empty()) {
        truth = read_map_auto(truth_path, &err);
        if (err)
            return die_last();
    }

    qpi_recovery* rec_raw = nullptr;
    if (qpi_recover(i1.get(), i2.get(), i3.get(), &params, truth.get(), &rec_raw) != QPI_OK)
        return die_last();
    RecoveryPtr rec(rec_raw);

    std::string msg;
    if (!ensure_out_dir(out_dir, &msg))
        return die(msg);

    qpi_map* amp_raw = nullptr;
    qpi_map* phase_raw = nullptr;
    if (qpi_recovery_amplitude(rec.get(), &amp_raw) != QPI_OK)
        return die_last();
    MapPtr amp(amp_raw);
    if (qpi_recovery_phase(rec.get(), &phase_raw) != QPI_OK)
        return die_last();
    MapPtr phase(phase_raw);
    if (qpi_map_write_pfm(amp.get(), (out_dir + "/amplitude.pfm").c_str()) != QPI_OK
        || qpi_map_write_pfm(phase.get(), (out_dir + "/phase.pfm").c_str()) != QPI_OK)
        return die_last();

    qpi_trace* trace_raw = nullptr;
    if (qpi_recovery_trace(rec.get(), &trace_raw) != QPI_OK)
        return die_last();
    TracePtr trace(trace_raw);
    if (qpi_trace_write_csv(trace.get(), (out_dir + "/trace.csv").c_str()) != QPI_OK)
        return die_last();

    int iterations = 0;
    int diverged = 0;
    qpi_recovery_iterations(rec.get(), &iterations);
    qpi_recovery_diverged(rec.get(), &diverged);
    std::cout << "iterations=" << iterations << (diverged ? " diverged=1" : "") << "\n";
    return 0;
}

int run_analyze(const std::string& trace_path, std::string out_path)
{
    qpi_trace* trace_raw = nullptr;
    if (qpi_trace_read_csv(trace_path.c_str(), &trace_raw) != QPI_OK)
        return die_last();
    TracePtr trace(trace_raw);

    double p = 0.0;
    double r = 0.0;
    if (qpi_trace_estimate(trace.get(), &p, &r) != QPI_OK)
        return die_last();

    char buf[96];
    std::snprintf(buf, sizeof(buf), "p=%.17g\nr=%.17g\n", p, r);
    std::cout << buf;
    if (out_path.empty())
        out_path = trace_path + ".fit.txt";
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << buf))
        return die("cannot write " + out_path);
    return 0;
}

int run_background(const std::string& object_dir, const std::string& background_dir,
                   std::string out_dir)
{
    int err = 0;
    MapPtr obj_amp = read_map_auto(object_dir + "/amplitude.pfm", &err);
    MapPtr obj_phase = err ? nullptr : read_map_auto(object_dir + "/phase.pfm", &err);
    MapPtr bg_amp = err ? nullptr : read_map_auto(background_dir + "/amplitude.pfm", &err);
    MapPtr bg_phase = err ? nullptr : read_map_auto(background_dir + "/phase.pfm", &err);
    if (err)
        return die_last();

    qpi_map* amp_raw = nullptr;
    qpi_map* phase_raw = nullptr;
    if (qpi_background_eliminate(obj_amp.get(), obj_phase.get(), bg_amp.get(), bg_phase.get(),
                                 &amp_raw, &phase_raw) != QPI_OK)
        return die_last();
    MapPtr amp(amp_raw), phase(phase_raw);

    if (out_dir.empty())
        out_dir = object_dir;
    std::string msg;
    if (!ensure_out_dir(out_dir, &msg))
        return die(msg);
    if (qpi_map_write_pfm(amp.get(), (out_dir + "/corrected_amplitude.pfm").c_str()) != QPI_OK
        || qpi_map_write_pfm(phase.get(), (out_dir + "/corrected_phase.pfm").c_str())
               != QPI_OK)
        return die_last();
    std::cout << out_dir << "/corrected_amplitude.pfm " << out_dir
              << "/corrected_phase.pfm\n";
    return 0;
}

int run_resolution(double beam_d, double focal, double lambda)
{
    double d = 0.0;
    if (qpi_theoretical_resolution(beam_d, focal, lambda, &d) != QPI_OK)
        return die_last();
    std::printf("%.6g\n", d);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quantitative phase imaging: simulate, recover, analyze"};
    app.require_subcommand(1);

    // genobject
    auto* genobject = app.add_subcommand("genobject", "Generate a synthetic object as PFM maps");
    std::string gen_config;
    std::string gen_out = ".";
    std::vector<std::pair<std::string, std::string>> gen_assign;
    genobject->add_option("--config", gen_config, "Base config file");
    genobject->add_option("--out-dir", gen_out, "Output directory");
    add_config_flag(genobject, &gen_assign, "--kind", "object.kind",
                    "complex|purephase|blobs|vortex|tilt");
    add_config_flag(genobject, &gen_assign, "--size", "object.size", "Grid size, even, >= 4");
    add_config_flag(genobject, &gen_assign, "--phase-range", "object.phase_range",
                    "Phase span in radians");
    add_config_flag(genobject, &gen_assign, "--amplitude-min", "object.amplitude_min",
                    "Minimum amplitude");
    add_config_flag(genobject, &gen_assign, "--amplitude-contrast", "object.amplitude_contrast",
                    "Max/min amplitude ratio");
    add_config_flag(genobject, &gen_assign, "--topological-number", "object.topological_number",
                    "Vortex winding count");
    add_config_flag(genobject, &gen_assign, "--blob-count", "object.blob_count",
                    "Number of blobs");
    add_config_flag(genobject, &gen_assign, "--blob-radius", "object.blob_radius",
                    "Blob radius in pixels");
    add_config_flag(genobject, &gen_assign, "--seed", "object.seed", "Generator seed");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Simulate the three modulated intensities");
    std::string sim_config;
    std::string sim_out;
    std::vector<std::pair<std::string, std::string>> sim_assign;
    simulate->add_option("--config", sim_config, "Config file")->required();
    simulate->add_option("--out-dir", sim_out, "Output directory (default: config output_dir)");
    simulate->add_option_function<std::vector<std::string>>(
        "--set",
        [&sim_assign](const std::vector<std::string>& kvs) {
            for (const auto& kv : kvs) {
                const size_t eq = kv.find('=');
                if (eq == std::string::npos)
                    throw CLI::ValidationError("--set expects key=value, got '" + kv + "'");
                sim_assign.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
            }
        },
        "Override a config key (key=value, repeatable)");

    // recover
    auto* recover = app.add_subcommand("recover", "Recover amplitude and phase from intensities");
    std::string rec_i1, rec_i2, rec_i3, rec_truth;
    std::string rec_shifts;
    std::string rec_window = "7x7";
    std::string rec_kmode = "combined";
    std::string rec_out = ".";
    int rec_pad = 6;
    int rec_iters = 25;
    double rec_tol = 1e-10;
    recover->add_option("--i1", rec_i1, "First intensity (PGM16 or PFM)")->required();
    recover->add_option("--i2", rec_i2, "Second intensity")->required();
    recover->add_option("--i3", rec_i3, "Third intensity")->required();
    recover->add_option("--shifts", rec_shifts, "Phase shifts t1,t2,t3 in radians")->required();
    recover->add_option("--window", rec_window, "Window WxH or WxH+dx+dy");
    recover->add_option("--pad", rec_pad, "Frequency-grid padding factor");
    recover->add_option("--kmode", rec_kmode, "K initialization: combined|zero");
    recover->add_option("--iters", rec_iters, "Maximum iterations");
    recover->add_option("--tol", rec_tol, "Self-residual stopping tolerance");
    recover->add_option("--truth-phase", rec_truth,
                        "Ground-truth phase PFM for per-iteration RMS tracing");
    recover->add_option("--out-dir", rec_out, "Output directory");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Fit convergence order/rate from a trace CSV");
    std::string ana_trace;
    std::string ana_out;
    analyze->add_option("--trace", ana_trace, "Trace CSV from recover")->required();
    analyze->add_option("--out", ana_out, "Output file (default: <trace>.fit.txt)");

    // background
    auto* background = app.add_subcommand("background", "Remove a recovered calibration frame");
    std::string bg_object, bg_background, bg_out;
    background->add_option("--object", bg_object, "Directory with object amplitude/phase PFMs")
        ->required();
    background
        ->add_option("--background", bg_background,
                     "Directory with calibration amplitude/phase PFMs")
        ->required();
    background->add_option("--out-dir", bg_out, "Output directory (default: object dir)");

    // resolution
    auto* resolution = app.add_subcommand("resolution", "Diffraction-limited spot size");
    double res_beam = 0.0, res_focal = 0.0, res_lambda = 0.0;
    resolution->add_option("--beam-d", res_beam, "Beam diameter in meters")->required();
    resolution->add_option("--focal", res_focal, "Focal length in meters")->required();
    resolution->add_option("--lambda", res_lambda, "Wavelength in meters")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (genobject->parsed())
            return run_genobject(gen_config, gen_assign, gen_out);
        if (simulate->parsed())
            return run_simulate(sim_config, sim_assign, sim_out);
        if (recover->parsed())
            return run_recover(rec_i1, rec_i2, rec_i3, rec_shifts, rec_window, rec_pad,
                               rec_kmode, rec_iters, rec_tol, rec_truth, rec_out);
        if (analyze->parsed())
            return run_analyze(ana_trace, ana_out);
        if (background->parsed())
            return run_background(bg_object, bg_background, bg_out);
        if (resolution->parsed())
            return run_resolution(res_beam, res_focal, res_lambda);
    } catch (const std::exception& e) {
        return die(e.what());
    }
    return die("no subcommand given");
}
