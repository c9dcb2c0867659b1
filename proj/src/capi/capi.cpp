#include "qpi/qpi.h"

#include "core/field.hpp"
#include "core/io.hpp"
#include "core/iterate.hpp"
#include "core/metrics.hpp"
#include "core/objects.hpp"

#include <cstring>
#include <new>
#include <string>

// Thin handle layer: every entry point validates pointers, forwards to the
// C++ core, and converts exceptions into status codes plus a thread-local
// message retrievable via qpi_last_error().

struct qpi_map {
    qpi::RealMap m;
};

struct qpi_config {
    qpi::ExperimentConfig c;
};

struct qpi_recovery {
    qpi::RecoveryResult r;
};

struct qpi_trace {
    qpi::ConvergenceTrace t;
};

namespace {

thread_local std::string g_last_error;

qpi_status fail(qpi_status code, const char* message)
{
    g_last_error = message;
    return code;
}

qpi_status fail_null(const char* what)
{
    g_last_error = std::string(what) + ": null argument";
    return QPI_ERR_NULL_ARGUMENT;
}

// Runs fn, translating exceptions; invalid_argument marks precondition
// violations, runtime_error covers I/O and numeric failures.
template <typename Fn>
qpi_status guarded(Fn&& fn)
{
    try {
        fn();
        return QPI_OK;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return QPI_ERR_INVALID_ARGUMENT;
    } catch (const std::runtime_error& e) {
        g_last_error = e.what();
        return QPI_ERR_IO;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return QPI_ERR_RUNTIME;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return QPI_ERR_RUNTIME;
    }
}

void copy_map_out(const qpi::RealMap& m, qpi_map** out)
{
    *out = new qpi_map{m};
}

} // namespace

extern "C" {

const char* qpi_version(void)
{
    return "0.1.0";
}

const char* qpi_last_error(void)
{
    return g_last_error.c_str();
}

/* ---- maps ---- */

qpi_status qpi_map_create(int width, int height, qpi_map** out)
{
    if (!out)
        return fail_null("qpi_map_create");
    *out = nullptr;
    return guarded([&] { *out = new qpi_map{qpi::RealMap(width, height)}; });
}

void qpi_map_destroy(qpi_map* map)
{
    delete map;
}

qpi_status qpi_map_width(const qpi_map* map, int* out)
{
    if (!map || !out)
        return fail_null("qpi_map_width");
    *out = map->m.width();
    return QPI_OK;
}

qpi_status qpi_map_height(const qpi_map* map, int* out)
{
    if (!map || !out)
        return fail_null("qpi_map_height");
    *out = map->m.height();
    return QPI_OK;
}

qpi_status qpi_map_get(const qpi_map* map, int x, int y, double* out)
{
    if (!map || !out)
        return fail_null("qpi_map_get");
    if (x < 0 || x >= map->m.width() || y < 0 || y >= map->m.height())
        return fail(QPI_ERR_INVALID_ARGUMENT, "qpi_map_get: index out of range");
    *out = map->m.at(x, y);
    return QPI_OK;
}

qpi_status qpi_map_set(qpi_map* map, int x, int y, double value)
{
    if (!map)
        return fail_null("qpi_map_set");
    if (x < 0 || x >= map->m.width() || y < 0 || y >= map->m.height())
        return fail(QPI_ERR_INVALID_ARGUMENT, "qpi_map_set: index out of range");
    map->m.at(x, y) = value;
    return QPI_OK;
}

qpi_status qpi_map_values(qpi_map* map, double** out_values, size_t* out_count)
{
    if (!map || !out_values || !out_count)
        return fail_null("qpi_map_values");
    *out_values = map->m.values().data();
    *out_count = map->m.size();
    return QPI_OK;
}

qpi_status qpi_map_read_pfm(const char* path, qpi_map** out)
{
    if (!path || !out)
        return fail_null("qpi_map_read_pfm");
    *out = nullptr;
    return guarded([&] { *out = new qpi_map{qpi::read_pfm(path)}; });
}

qpi_status qpi_map_write_pfm(const qpi_map* map, const char* path)
{
    if (!map || !path)
        return fail_null("qpi_map_write_pfm");
    return guarded([&] { qpi::write_pfm(map->m, path); });
}

qpi_status qpi_map_read_pgm16(const char* path, qpi_map** out)
{
    if (!path || !out)
        return fail_null("qpi_map_read_pgm16");
    *out = nullptr;
    return guarded([&] { *out = new qpi_map{qpi::read_pgm16(path)}; });
}

qpi_status qpi_map_write_pgm16(const qpi_map* map, const char* path)
{
    if (!map || !path)
        return fail_null("qpi_map_write_pgm16");
    return guarded([&] { qpi::write_pgm16(map->m, path); });
}

/* ---- experiment configuration ---- */

qpi_status qpi_config_create(qpi_config** out)
{
    if (!out)
        return fail_null("qpi_config_create");
    *out = nullptr;
    return guarded([&] { *out = new qpi_config{}; });
}

void qpi_config_destroy(qpi_config* cfg)
{
    delete cfg;
}

qpi_status qpi_config_load(const char* path, qpi_config** out)
{
    if (!path || !out)
        return fail_null("qpi_config_load");
    *out = nullptr;
    return guarded([&] { *out = new qpi_config{qpi::load_config(path)}; });
}

qpi_status qpi_config_save(const qpi_config* cfg, const char* path)
{
    if (!cfg || !path)
        return fail_null("qpi_config_save");
    return guarded([&] { qpi::save_config(cfg->c, path); });
}

qpi_status qpi_config_parse(const char* text, qpi_config** out)
{
    if (!text || !out)
        return fail_null("qpi_config_parse");
    *out = nullptr;
    return guarded([&] { *out = new qpi_config{qpi::parse_config(text)}; });
}

qpi_status qpi_config_serialize(const qpi_config* cfg, char** out)
{
    if (!cfg || !out)
        return fail_null("qpi_config_serialize");
    *out = nullptr;
    return guarded([&] {
        const std::string text = qpi::serialize_config(cfg->c);
        char* buf = new char[text.size() + 1];
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *out = buf;
    });
}

void qpi_string_free(char* s)
{
    delete[] s;
}

qpi_status qpi_config_set(qpi_config* cfg, const char* key, const char* value)
{
    if (!cfg || !key || !value)
        return fail_null("qpi_config_set");
    return guarded([&] { qpi::config_apply_key(cfg->c, key, value); });
}

qpi_status qpi_config_get(const qpi_config* cfg, const char* key, char** out)
{
    if (!cfg || !key || !out)
        return fail_null("qpi_config_get");
    *out = nullptr;
    return guarded([&] {
        const std::string value = qpi::config_get_key(cfg->c, key);
        char* buf = new char[value.size() + 1];
        std::memcpy(buf, value.c_str(), value.size() + 1);
        *out = buf;
    });
}

/* ---- pipeline ---- */

qpi_status qpi_generate_object(const qpi_config* cfg, qpi_map** out_amplitude,
                               qpi_map** out_phase)
{
    if (!cfg || !out_amplitude || !out_phase)
        return fail_null("qpi_generate_object");
    *out_amplitude = nullptr;
    *out_phase = nullptr;
    return guarded([&] {
        qpi::config_validate(cfg->c);
        qpi::RealMap amplitude;
        qpi::RealMap phase;
        if (cfg->c.use_import) {
            phase = qpi::read_pfm(cfg->c.import_phase);
            amplitude = cfg->c.import_amplitude.empty()
                            ? qpi::RealMap(phase.width(), phase.height(), 1.0)
                            : qpi::read_pfm(cfg->c.import_amplitude);
            if (!amplitude.same_shape(phase))
                throw std::invalid_argument(
                    "imported amplitude and phase maps differ in size");
        } else {
            qpi::ObjectSpec obj = qpi::generate(cfg->c.recipe);
            amplitude = std::move(obj.amplitude);
            phase = std::move(obj.phase);
        }
        copy_map_out(amplitude, out_amplitude);
        copy_map_out(phase, out_phase);
    });
}

qpi_status qpi_simulate(const qpi_config* cfg, const qpi_map* amplitude, const qpi_map* phase,
                        qpi_map** out_i1, qpi_map** out_i2, qpi_map** out_i3)
{
    if (!cfg || !amplitude || !phase || !out_i1 || !out_i2 || !out_i3)
        return fail_null("qpi_simulate");
    *out_i1 = nullptr;
    *out_i2 = nullptr;
    *out_i3 = nullptr;
    return guarded([&] {
        qpi::ObjectSpec obj(amplitude->m, phase->m, cfg->c.pad_factor);
        const auto triple =
            qpi::simulate_triple(obj, cfg->c.window, cfg->c.shifts, cfg->c.noise);
        copy_map_out(triple[0], out_i1);
        copy_map_out(triple[1], out_i2);
        copy_map_out(triple[2], out_i3);
    });
}

void qpi_recover_params_init(qpi_recover_params* params)
{
    if (!params)
        return;
    params->t1 = 0.0;
    params->t2 = 1.5707963267948966;
    params->t3 = 3.14159265358979323846;
    params->window_w = 7;
    params->window_h = 7;
    params->window_dx = 0;
    params->window_dy = 0;
    params->pad_factor = 6;
    params->kmode = 0;
    params->max_iters = 25;
    params->self_residual_tol = 1e-10;
    params->record_trace = 1;
}

qpi_status qpi_recover(const qpi_map* i1, const qpi_map* i2, const qpi_map* i3,
                       const qpi_recover_params* params, const qpi_map* truth_phase,
                       qpi_recovery** out)
{
    if (!i1 || !i2 || !i3 || !params || !out)
        return fail_null("qpi_recover");
    *out = nullptr;
    return guarded([&] {
        if (params->kmode != 0 && params->kmode != 1)
            throw std::invalid_argument("qpi_recover: kmode must be 0 or 1");
        const qpi::PhaseShiftTriple shifts{params->t1, params->t2, params->t3};
        const qpi::WindowSpec window{params->window_w, params->window_h, params->window_dx,
                                     params->window_dy};
        qpi::IterationConfig cfg;
        cfg.max_iters = params->max_iters;
        cfg.self_residual_tol = params->self_residual_tol;
        cfg.record_trace = params->record_trace != 0;
        const qpi::KMode kmode = params->kmode == 0 ? qpi::KMode::Combined : qpi::KMode::Zero;
        qpi::RecoveryResult result = qpi::recover_from_triple(
            i1->m, i2->m, i3->m, shifts, window, params->pad_factor, kmode, cfg, nullptr,
            truth_phase ? &truth_phase->m : nullptr);
        *out = new qpi_recovery{std::move(result)};
    });
}

void qpi_recovery_destroy(qpi_recovery* rec)
{
    delete rec;
}

qpi_status qpi_recovery_amplitude(const qpi_recovery* rec, qpi_map** out)
{
    if (!rec || !out)
        return fail_null("qpi_recovery_amplitude");
    *out = nullptr;
    return guarded([&] { copy_map_out(rec->r.amplitude, out); });
}

qpi_status qpi_recovery_phase(const qpi_recovery* rec, qpi_map** out)
{
    if (!rec || !out)
        return fail_null("qpi_recovery_phase");
    *out = nullptr;
    return guarded([&] { copy_map_out(rec->r.phase, out); });
}

qpi_status qpi_recovery_reference_k(const qpi_recovery* rec, qpi_map** out)
{
    if (!rec || !out)
        return fail_null("qpi_recovery_reference_k");
    *out = nullptr;
    return guarded([&] { copy_map_out(rec->r.K_final, out); });
}

qpi_status qpi_recovery_reference_p(const qpi_recovery* rec, qpi_map** out)
{
    if (!rec || !out)
        return fail_null("qpi_recovery_reference_p");
    *out = nullptr;
    return guarded([&] { copy_map_out(rec->r.P_final, out); });
}

qpi_status qpi_recovery_iterations(const qpi_recovery* rec, int* out)
{
    if (!rec || !out)
        return fail_null("qpi_recovery_iterations");
    *out = rec->r.iterations_run;
    return QPI_OK;
}

qpi_status qpi_recovery_diverged(const qpi_recovery* rec, int* out)
{
    if (!rec || !out)
        return fail_null("qpi_recovery_diverged");
    *out = rec->r.diverged ? 1 : 0;
    return QPI_OK;
}

qpi_status qpi_recovery_clamp_counts(const qpi_recovery* rec, int64_t* r1_clamped,
                                     int64_t* discriminant_clamped, int64_t* indeterminate,
                                     int64_t* low_illumination)
{
    if (!rec)
        return fail_null("qpi_recovery_clamp_counts");
    if (r1_clamped)
        *r1_clamped = rec->r.clamp_counts.r1_clamped;
    if (discriminant_clamped)
        *discriminant_clamped = rec->r.clamp_counts.discriminant_clamped;
    if (indeterminate)
        *indeterminate = rec->r.clamp_counts.indeterminate;
    if (low_illumination)
        *low_illumination = rec->r.clamp_counts.low_illumination;
    return QPI_OK;
}

qpi_status qpi_recovery_trace(const qpi_recovery* rec, qpi_trace** out)
{
    if (!rec || !out)
        return fail_null("qpi_recovery_trace");
    *out = nullptr;
    return guarded([&] { *out = new qpi_trace{rec->r.trace}; });
}

/* ---- convergence traces ---- */

void qpi_trace_destroy(qpi_trace* trace)
{
    delete trace;
}

qpi_status qpi_trace_lengths(const qpi_trace* trace, int* out_rms_len, int* out_residual_len)
{
    if (!trace)
        return fail_null("qpi_trace_lengths");
    if (out_rms_len)
        *out_rms_len = static_cast<int>(trace->t.rms.size());
    if (out_residual_len)
        *out_residual_len = static_cast<int>(trace->t.self_residual.size());
    return QPI_OK;
}

qpi_status qpi_trace_rms(const qpi_trace* trace, int k, double* out)
{
    if (!trace || !out)
        return fail_null("qpi_trace_rms");
    if (k < 0 || k >= static_cast<int>(trace->t.rms.size()))
        return fail(QPI_ERR_INVALID_ARGUMENT, "qpi_trace_rms: index out of range");
    *out = trace->t.rms[static_cast<size_t>(k)];
    return QPI_OK;
}

qpi_status qpi_trace_self_residual(const qpi_trace* trace, int k, double* out)
{
    if (!trace || !out)
        return fail_null("qpi_trace_self_residual");
    if (k < 0 || k >= static_cast<int>(trace->t.self_residual.size()))
        return fail(QPI_ERR_INVALID_ARGUMENT, "qpi_trace_self_residual: index out of range");
    *out = trace->t.self_residual[static_cast<size_t>(k)];
    return QPI_OK;
}

qpi_status qpi_trace_fit(const qpi_trace* trace, double* out_p, double* out_r)
{
    if (!trace || !out_p || !out_r)
        return fail_null("qpi_trace_fit");
    *out_p = trace->t.fitted_p;
    *out_r = trace->t.fitted_r;
    return QPI_OK;
}

qpi_status qpi_trace_estimate(const qpi_trace* trace, double* out_p, double* out_r)
{
    if (!trace || !out_p || !out_r)
        return fail_null("qpi_trace_estimate");
    return guarded([&] {
        const qpi::ConvergenceFit fit = qpi::estimate_convergence(trace->t.rms);
        *out_p = fit.p;
        *out_r = fit.r;
    });
}

qpi_status qpi_trace_write_csv(const qpi_trace* trace, const char* path)
{
    if (!trace || !path)
        return fail_null("qpi_trace_write_csv");
    return guarded([&] { qpi::write_trace_csv(trace->t, path); });
}

qpi_status qpi_trace_read_csv(const char* path, qpi_trace** out)
{
    if (!path || !out)
        return fail_null("qpi_trace_read_csv");
    *out = nullptr;
    return guarded([&] { *out = new qpi_trace{qpi::read_trace_csv(path)}; });
}

/* ---- analysis ---- */

qpi_status qpi_phase_rms(const qpi_map* recovered, const qpi_map* truth, int remove_piston,
                         double* out)
{
    if (!recovered || !truth || !out)
        return fail_null("qpi_phase_rms");
    return guarded(
        [&] { *out = qpi::phase_rms(recovered->m, truth->m, remove_piston != 0); });
}

qpi_status qpi_background_eliminate(const qpi_map* obj_amplitude, const qpi_map* obj_phase,
                                    const qpi_map* bg_amplitude, const qpi_map* bg_phase,
                                    qpi_map** out_amplitude, qpi_map** out_phase)
{
    if (!obj_amplitude || !obj_phase || !bg_amplitude || !bg_phase || !out_amplitude
        || !out_phase)
        return fail_null("qpi_background_eliminate");
    *out_amplitude = nullptr;
    *out_phase = nullptr;
    return guarded([&] {
        qpi::BackgroundResult result = qpi::background_eliminate(
            obj_amplitude->m, obj_phase->m, bg_amplitude->m, bg_phase->m);
        copy_map_out(result.amplitude, out_amplitude);
        copy_map_out(result.phase, out_phase);
    });
}

qpi_status qpi_theoretical_resolution(double beam_diameter, double focal_length,
                                      double wavelength, double* out)
{
    if (!out)
        return fail_null("qpi_theoretical_resolution");
    return guarded(
        [&] { *out = qpi::theoretical_resolution(beam_diameter, focal_length, wavelength); });
}

qpi_status qpi_window_parse(const char* arg, int* out_w, int* out_h, int* out_dx, int* out_dy)
{
    if (!arg || !out_w || !out_h || !out_dx || !out_dy)
        return fail_null("qpi_window_parse");
    return guarded([&] {
        const qpi::WindowSpec spec = qpi::parse_window_arg(arg);
        *out_w = spec.width_px;
        *out_h = spec.height_px;
        *out_dx = spec.offset_x;
        *out_dy = spec.offset_y;
    });
}

} /* extern "C" */
