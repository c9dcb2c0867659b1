#ifndef QPI_CORE_IO_HPP
#define QPI_CORE_IO_HPP

#include "forward.hpp"
#include "iterate.hpp"
#include "metrics.hpp"
#include "objects.hpp"
#include "types.hpp"

#include <string>

namespace qpi {

/// Grayscale PFM ("Pf"): ASCII header, scale -1.0 for little-endian payload,
/// rows of float32 stored bottom-to-top. Round trips are lossless for values
/// representable in float32; non-finite values are rejected on write.
RealMap read_pfm(const std::string& path);
void write_pfm(const RealMap& map, const std::string& path);

/// Binary PGM (P5) with maxval 65535, big-endian samples, plus a sidecar
/// "<path>.scale" line "scale=<float>" recording the quantization scale
/// (the map maximum). Reading without a sidecar assumes scale 1.
RealMap read_pgm16(const std::string& path);
void write_pgm16(const RealMap& map, const std::string& path);

/// Per-iteration convergence table: header iter,rms,self_residual,ratio with
/// ratio = rms[k]/rms[k-1] (empty for k = 0), fitted p and r appended as
/// trailing "# p=<v>" / "# r=<v>" comment lines.
void write_trace_csv(const ConvergenceTrace& trace, const std::string& path);
ConvergenceTrace read_trace_csv(const std::string& path);

/// One experiment end to end: the object (generated or imported), optics,
/// measurement noise, and iteration control.
struct ExperimentConfig {
    ObjectRecipe recipe;
    bool use_import = false;
    std::string import_amplitude; // PFM path; empty = amplitude 1 everywhere
    std::string import_phase;     // PFM path; required when use_import
    WindowSpec window;
    PhaseShiftTriple shifts{0.0, 1.5707963267948966, 3.14159265358979323846};
    int pad_factor = 6;
    NoiseSpec noise;
    IterationConfig iteration;
    std::string output_dir = ".";
};

/// Line-based "key = value" text with '#' comments and dotted keys
/// (e.g. "window.width_px = 7"). Serialization is canonical: every key,
/// fixed order, shortest exact float representation — so parse, serialize,
/// parse is a fixed point. Unknown keys and violated invariants are rejected
/// by name.
ExperimentConfig parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

/// Single "key = value" assignment / lookup using the config-file key names;
/// unknown keys are rejected by name. apply does not validate — call
/// config_validate once all assignments are in.
void config_apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string config_get_key(const ExperimentConfig& cfg, const std::string& key);
void config_validate(const ExperimentConfig& cfg);

/// Window syntax "WxH" or "WxH+dx+dy" (offsets may be negative).
WindowSpec parse_window_arg(const std::string& arg);

/// Writes via a temp file in the target directory followed by a rename.
void atomic_write_file(const std::string& path, const std::string& contents);

} // namespace qpi

#endif
