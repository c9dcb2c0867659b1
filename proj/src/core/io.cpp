#include "io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace qpi {

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof())
        throw std::runtime_error("read failure on " + path);
    return std::move(buf).str();
}

// Shortest exact representation: 17 significant digits round-trip a double.
std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& what)
{
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw std::runtime_error(what + ": not a number: '" + s + "'");
    return v;
}

long long parse_int(const std::string& s, const std::string& what)
{
    const char* begin = s.c_str();
    char* end = nullptr;
    const long long v = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0')
        throw std::runtime_error(what + ": not an integer: '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s, const std::string& what)
{
    if (s == "true")
        return true;
    if (s == "false")
        return false;
    throw std::runtime_error(what + ": expected true/false, got '" + s + "'");
}

std::string trim(const std::string& s)
{
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n");
    if (a == std::string::npos)
        return "";
    return s.substr(a, b - a + 1);
}

// Whitespace-delimited token reader over a raw buffer; '#' starts a comment
// when allowed (Netpbm headers).
struct TokenReader {
    const std::string& data;
    size_t pos = 0;
    bool allow_comments = false;

    std::string next(const std::string& what)
    {
        for (;;) {
            while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos])))
                ++pos;
            if (allow_comments && pos < data.size() && data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n')
                    ++pos;
                continue;
            }
            break;
        }
        const size_t start = pos;
        while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])))
            ++pos;
        if (start == pos)
            throw std::runtime_error(what + ": truncated header");
        return data.substr(start, pos - start);
    }

    // The single whitespace byte separating header from payload.
    void expect_separator(const std::string& what)
    {
        if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
            throw std::runtime_error(what + ": missing header/payload separator");
        ++pos;
    }
};

std::uint32_t swap32(std::uint32_t v)
{
    return ((v & 0xFF000000u) >> 24) | ((v & 0x00FF0000u) >> 8) | ((v & 0x0000FF00u) << 8)
         | ((v & 0x000000FFu) << 24);
}

constexpr bool kNativeLittle = std::endian::native == std::endian::little;

} // namespace

RealMap read_pfm(const std::string& path)
{
    const std::string data = read_file(path);
    TokenReader tok{data};
    if (tok.next("PFM") != "Pf")
        throw std::runtime_error("PFM: bad magic in " + path + " (grayscale 'Pf' expected)");
    const long long w = parse_int(tok.next("PFM width"), "PFM width");
    const long long h = parse_int(tok.next("PFM height"), "PFM height");
    if (w < 1 || h < 1)
        throw std::runtime_error("PFM: bad dimensions in " + path);
    const double scale = parse_double(tok.next("PFM scale"), "PFM scale");
    if (scale == 0.0)
        throw std::runtime_error("PFM: zero scale in " + path);
    tok.expect_separator("PFM");

    const size_t n = static_cast<size_t>(w) * static_cast<size_t>(h);
    if (data.size() - tok.pos != n * 4)
        throw std::runtime_error("PFM: payload size mismatch in " + path);

    const bool file_little = scale < 0.0;
    RealMap map(static_cast<int>(w), static_cast<int>(h));
    const char* p = data.data() + tok.pos;
    // scanlines are stored bottom row first
    for (long long y = h - 1; y >= 0; --y)
        for (long long x = 0; x < w; ++x) {
            std::uint32_t bits;
            std::memcpy(&bits, p, 4);
            p += 4;
            if (file_little != kNativeLittle)
                bits = swap32(bits);
            map.at(static_cast<int>(x), static_cast<int>(y)) =
                static_cast<double>(std::bit_cast<float>(bits));
        }
    return map;
}

void write_pfm(const RealMap& map, const std::string& path)
{
    std::string out;
    out.reserve(48 + map.size() * 4);
    out += "Pf\n";
    out += std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n";
    out += "-1.0\n";
    for (int y = map.height() - 1; y >= 0; --y)
        for (int x = 0; x < map.width(); ++x) {
            const double v = map.at(x, y);
            const float f = static_cast<float>(v);
            if (!std::isfinite(v) || !std::isfinite(f))
                throw std::runtime_error("PFM: non-finite or unrepresentable value at (" +
                                         std::to_string(x) + "," + std::to_string(y) + ")");
            std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
            if (!kNativeLittle)
                bits = swap32(bits);
            char raw[4];
            std::memcpy(raw, &bits, 4);
            out.append(raw, 4);
        }
    atomic_write_file(path, out);
}

RealMap read_pgm16(const std::string& path)
{
    const std::string data = read_file(path);
    TokenReader tok{data, 0, true};
    if (tok.next("PGM") != "P5")
        throw std::runtime_error("PGM: bad magic in " + path);
    const long long w = parse_int(tok.next("PGM width"), "PGM width");
    const long long h = parse_int(tok.next("PGM height"), "PGM height");
    const long long maxval = parse_int(tok.next("PGM maxval"), "PGM maxval");
    if (w < 1 || h < 1)
        throw std::runtime_error("PGM: bad dimensions in " + path);
    if (maxval != 65535)
        throw std::runtime_error("PGM: maxval must be 65535 in " + path);
    tok.expect_separator("PGM");

    const size_t n = static_cast<size_t>(w) * static_cast<size_t>(h);
    if (data.size() - tok.pos != n * 2)
        throw std::runtime_error("PGM: payload size mismatch in " + path);

    double scale = 1.0;
    if (std::filesystem::exists(path + ".scale")) {
        const std::string side = trim(read_file(path + ".scale"));
        if (side.rfind("scale=", 0) != 0)
            throw std::runtime_error("PGM: malformed sidecar " + path + ".scale");
        scale = parse_double(side.substr(6), "PGM sidecar scale");
    }

    RealMap map(static_cast<int>(w), static_cast<int>(h));
    const unsigned char* p = reinterpret_cast<const unsigned char*>(data.data()) + tok.pos;
    for (long long y = 0; y < h; ++y)
        for (long long x = 0; x < w; ++x) {
            const unsigned sample = (static_cast<unsigned>(p[0]) << 8) | p[1];
            p += 2;
            map.at(static_cast<int>(x), static_cast<int>(y)) = sample * scale / 65535.0;
        }
    return map;
}

void write_pgm16(const RealMap& map, const std::string& path)
{
    double scale = 0.0;
    for (double v : map.values()) {
        if (!std::isfinite(v))
            throw std::runtime_error("PGM: non-finite intensity value");
        scale = std::max(scale, v);
    }
    if (scale <= 0.0)
        scale = 1.0;

    std::string out;
    out.reserve(48 + map.size() * 2);
    out += "P5\n";
    out += std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n";
    out += "65535\n";
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            long s = std::lround(map.at(x, y) / scale * 65535.0);
            s = std::max(0L, std::min(65535L, s));
            out.push_back(static_cast<char>((s >> 8) & 0xFF));
            out.push_back(static_cast<char>(s & 0xFF));
        }
    atomic_write_file(path, out);
    atomic_write_file(path + ".scale", "scale=" + fmt_double(scale) + "\n");
}

void write_trace_csv(const ConvergenceTrace& trace, const std::string& path)
{
    const size_t n_rows =
        std::max(trace.rms.size(),
                 trace.self_residual.empty() ? size_t{0} : trace.self_residual.size() + 1);
    std::string out = "iter,rms,self_residual,ratio\n";
    for (size_t k = 0; k < n_rows; ++k) {
        out += std::to_string(k);
        out += ',';
        if (k < trace.rms.size())
            out += fmt_double(trace.rms[k]);
        out += ',';
        if (k >= 1 && k - 1 < trace.self_residual.size())
            out += fmt_double(trace.self_residual[k - 1]);
        out += ',';
        if (k >= 1 && k < trace.rms.size() && trace.rms[k - 1] != 0.0)
            out += fmt_double(trace.rms[k] / trace.rms[k - 1]);
        out += '\n';
    }
    out += "# p=" + fmt_double(trace.fitted_p) + "\n";
    out += "# r=" + fmt_double(trace.fitted_r) + "\n";
    atomic_write_file(path, out);
}

ConvergenceTrace read_trace_csv(const std::string& path)
{
    const std::string data = read_file(path);
    std::istringstream in(data);
    std::string line;
    ConvergenceTrace trace;
    bool header_seen = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty())
            continue;
        if (line[0] == '#') {
            const std::string body = trim(line.substr(1));
            if (body.rfind("p=", 0) == 0)
                trace.fitted_p = parse_double(body.substr(2), "trace p");
            else if (body.rfind("r=", 0) == 0)
                trace.fitted_r = parse_double(body.substr(2), "trace r");
            continue;
        }
        if (!header_seen) {
            if (line != "iter,rms,self_residual,ratio")
                throw std::runtime_error("trace CSV: unexpected header in " + path);
            header_seen = true;
            continue;
        }
        std::string cells[4];
        size_t start = 0;
        for (int c = 0; c < 4; ++c) {
            const size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                cells[c] = line.substr(start);
                start = line.size();
            } else {
                cells[c] = line.substr(start, comma - start);
                start = comma + 1;
            }
        }
        if (!cells[1].empty())
            trace.rms.push_back(parse_double(cells[1], "trace rms"));
        if (!cells[2].empty())
            trace.self_residual.push_back(parse_double(cells[2], "trace self_residual"));
    }
    if (!header_seen)
        throw std::runtime_error("trace CSV: missing header in " + path);
    return trace;
}

namespace {

std::string kind_name(ObjectKind k)
{
    switch (k) {
    case ObjectKind::ComplexStructured: return "complex";
    case ObjectKind::PurePhase: return "purephase";
    case ObjectKind::Blobs: return "blobs";
    case ObjectKind::Vortex: return "vortex";
    case ObjectKind::TiltBackground: return "tilt";
    }
    throw std::invalid_argument("config: unknown object kind value");
}

ObjectKind kind_from_name(const std::string& s)
{
    if (s == "complex") return ObjectKind::ComplexStructured;
    if (s == "purephase") return ObjectKind::PurePhase;
    if (s == "blobs") return ObjectKind::Blobs;
    if (s == "vortex") return ObjectKind::Vortex;
    if (s == "tilt") return ObjectKind::TiltBackground;
    throw std::invalid_argument("config: unknown object.kind '" + s + "'");
}

std::string noise_name(NoiseKind k)
{
    switch (k) {
    case NoiseKind::None: return "none";
    case NoiseKind::AdditiveGaussian: return "gaussian";
    case NoiseKind::Quantize16: return "quantize16";
    }
    throw std::invalid_argument("config: unknown noise kind value");
}

NoiseKind noise_from_name(const std::string& s)
{
    if (s == "none") return NoiseKind::None;
    if (s == "gaussian") return NoiseKind::AdditiveGaussian;
    if (s == "quantize16") return NoiseKind::Quantize16;
    throw std::invalid_argument("config: unknown noise.kind '" + s + "'");
}

} // namespace

void config_validate(const ExperimentConfig& cfg)
{
    if (cfg.use_import) {
        if (cfg.import_phase.empty())
            throw std::invalid_argument("config: import.enabled requires import.phase");
    } else {
        const ObjectRecipe& r = cfg.recipe;
        if (r.size < 4 || r.size % 2 != 0)
            throw std::invalid_argument("config: object.size must be even and >= 4");
        if (r.phase_range < 0.0)
            throw std::invalid_argument("config: object.phase_range must be >= 0");
        if (r.amplitude_min <= 0.0)
            throw std::invalid_argument("config: object.amplitude_min must be > 0");
        if (r.amplitude_contrast < 1.0)
            throw std::invalid_argument("config: object.amplitude_contrast must be >= 1");
        if (r.kind == ObjectKind::Blobs && (r.blob_count < 0 || r.blob_radius <= 0.0))
            throw std::invalid_argument("config: blobs need blob_count >= 0, blob_radius > 0");
    }
    if (cfg.window.width_px < 1 || cfg.window.height_px < 1 || cfg.window.width_px % 2 == 0
        || cfg.window.height_px % 2 == 0)
        throw std::invalid_argument("config: window dimensions must be odd and >= 1");
    if (cfg.pad_factor < 1)
        throw std::invalid_argument("config: pad_factor must be >= 1");
    if (cfg.noise.sigma < 0.0)
        throw std::invalid_argument("config: noise.sigma must be >= 0");
    if (cfg.iteration.max_iters < 1)
        throw std::invalid_argument("config: iteration.max_iters must be >= 1");
    if (cfg.iteration.self_residual_tol < 0.0)
        throw std::invalid_argument("config: iteration.self_residual_tol must be >= 0");
}

void config_apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    if (key == "object.kind")
        cfg.recipe.kind = kind_from_name(value);
    else if (key == "object.size")
        cfg.recipe.size = static_cast<int>(parse_int(value, key));
    else if (key == "object.phase_range")
        cfg.recipe.phase_range = parse_double(value, key);
    else if (key == "object.amplitude_min")
        cfg.recipe.amplitude_min = parse_double(value, key);
    else if (key == "object.amplitude_contrast")
        cfg.recipe.amplitude_contrast = parse_double(value, key);
    else if (key == "object.topological_number")
        cfg.recipe.topological_number = static_cast<int>(parse_int(value, key));
    else if (key == "object.blob_count")
        cfg.recipe.blob_count = static_cast<int>(parse_int(value, key));
    else if (key == "object.blob_radius")
        cfg.recipe.blob_radius = parse_double(value, key);
    else if (key == "object.seed")
        cfg.recipe.seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "import.enabled")
        cfg.use_import = parse_bool(value, key);
    else if (key == "import.amplitude")
        cfg.import_amplitude = value;
    else if (key == "import.phase")
        cfg.import_phase = value;
    else if (key == "window.width_px")
        cfg.window.width_px = static_cast<int>(parse_int(value, key));
    else if (key == "window.height_px")
        cfg.window.height_px = static_cast<int>(parse_int(value, key));
    else if (key == "window.offset_x")
        cfg.window.offset_x = static_cast<int>(parse_int(value, key));
    else if (key == "window.offset_y")
        cfg.window.offset_y = static_cast<int>(parse_int(value, key));
    else if (key == "shifts.t1")
        cfg.shifts.t1 = parse_double(value, key);
    else if (key == "shifts.t2")
        cfg.shifts.t2 = parse_double(value, key);
    else if (key == "shifts.t3")
        cfg.shifts.t3 = parse_double(value, key);
    else if (key == "pad_factor")
        cfg.pad_factor = static_cast<int>(parse_int(value, key));
    else if (key == "noise.kind")
        cfg.noise.kind = noise_from_name(value);
    else if (key == "noise.sigma")
        cfg.noise.sigma = parse_double(value, key);
    else if (key == "noise.seed")
        cfg.noise.seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "iteration.max_iters")
        cfg.iteration.max_iters = static_cast<int>(parse_int(value, key));
    else if (key == "iteration.self_residual_tol")
        cfg.iteration.self_residual_tol = parse_double(value, key);
    else if (key == "iteration.record_trace")
        cfg.iteration.record_trace = parse_bool(value, key);
    else if (key == "output_dir")
        cfg.output_dir = value;
    else
        throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::string config_get_key(const ExperimentConfig& cfg, const std::string& key)
{
    // scan the canonical serialization so lookups always agree with it
    const std::string text = serialize_config(cfg);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        if (trim(line.substr(0, eq)) == key)
            return trim(line.substr(eq + 1));
    }
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: missing '=' in line '" + line + "'");
        config_apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    config_validate(cfg);
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg)
{
    auto line = [](const std::string& key, const std::string& value) {
        if (value.empty())
            return key + " =\n";
        return key + " = " + value + "\n";
    };
    std::string out;
    out += line("object.kind", kind_name(cfg.recipe.kind));
    out += line("object.size", std::to_string(cfg.recipe.size));
    out += line("object.phase_range", fmt_double(cfg.recipe.phase_range));
    out += line("object.amplitude_min", fmt_double(cfg.recipe.amplitude_min));
    out += line("object.amplitude_contrast", fmt_double(cfg.recipe.amplitude_contrast));
    out += line("object.topological_number", std::to_string(cfg.recipe.topological_number));
    out += line("object.blob_count", std::to_string(cfg.recipe.blob_count));
    out += line("object.blob_radius", fmt_double(cfg.recipe.blob_radius));
    out += line("object.seed", std::to_string(cfg.recipe.seed));
    out += line("import.enabled", cfg.use_import ? "true" : "false");
    out += line("import.amplitude", cfg.import_amplitude);
    out += line("import.phase", cfg.import_phase);
    out += line("window.width_px", std::to_string(cfg.window.width_px));
    out += line("window.height_px", std::to_string(cfg.window.height_px));
    out += line("window.offset_x", std::to_string(cfg.window.offset_x));
    out += line("window.offset_y", std::to_string(cfg.window.offset_y));
    out += line("shifts.t1", fmt_double(cfg.shifts.t1));
    out += line("shifts.t2", fmt_double(cfg.shifts.t2));
    out += line("shifts.t3", fmt_double(cfg.shifts.t3));
    out += line("pad_factor", std::to_string(cfg.pad_factor));
    out += line("noise.kind", noise_name(cfg.noise.kind));
    out += line("noise.sigma", fmt_double(cfg.noise.sigma));
    out += line("noise.seed", std::to_string(cfg.noise.seed));
    out += line("iteration.max_iters", std::to_string(cfg.iteration.max_iters));
    out += line("iteration.self_residual_tol", fmt_double(cfg.iteration.self_residual_tol));
    out += line("iteration.record_trace", cfg.iteration.record_trace ? "true" : "false");
    out += line("output_dir", cfg.output_dir);
    return out;
}

ExperimentConfig load_config(const std::string& path)
{
    return parse_config(read_file(path));
}

void save_config(const ExperimentConfig& cfg, const std::string& path)
{
    atomic_write_file(path, serialize_config(cfg));
}

WindowSpec parse_window_arg(const std::string& arg)
{
    WindowSpec spec;
    int consumed = 0;
    if (std::sscanf(arg.c_str(), "%dx%d%n", &spec.width_px, &spec.height_px, &consumed) != 2)
        throw std::invalid_argument("window: expected WxH or WxH+dx+dy, got '" + arg + "'");
    if (arg.c_str()[consumed] != '\0') {
        int more = 0;
        if (std::sscanf(arg.c_str() + consumed, "+%d+%d%n", &spec.offset_x, &spec.offset_y,
                        &more) != 2
            || arg.c_str()[consumed + more] != '\0')
            throw std::invalid_argument("window: expected WxH or WxH+dx+dy, got '" + arg + "'");
    }
    return spec;
}

void atomic_write_file(const std::string& path, const std::string& contents)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open " + tmp + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out.good())
            throw std::runtime_error("write failure on " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace qpi
