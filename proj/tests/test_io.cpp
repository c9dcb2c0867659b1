#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/io.hpp"
#include "oracles.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

using namespace qpi;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = qpi_test::kPi;

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "qpi_io_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const fs::path& path, const std::string& data)
{
    std::ofstream out(path, std::ios::binary);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    REQUIRE(out.good());
}

// Random values rounded to float32 so a PFM round trip can be bit-exact.
RealMap float_exact_map(int w, int h, unsigned seed)
{
    RealMap m = qpi_test::random_map(w, h, seed, -5.0, 5.0);
    for (double& v : m.values())
        v = static_cast<double>(static_cast<float>(v));
    return m;
}

void append_float_be(std::string& out, float f)
{
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
    out.push_back(static_cast<char>((bits >> 24) & 0xFF));
    out.push_back(static_cast<char>((bits >> 16) & 0xFF));
    out.push_back(static_cast<char>((bits >> 8) & 0xFF));
    out.push_back(static_cast<char>(bits & 0xFF));
}

} // namespace

TEST_CASE("pfm round trip is bit-identical")
{
    const fs::path dir = scratch_dir("pfm_roundtrip");
    const RealMap m = float_exact_map(32, 32, 3u);
    const std::string path = (dir / "map.pfm").string();
    write_pfm(m, path);
    const RealMap back = read_pfm(path);
    REQUIRE(back.same_shape(m));
    for (size_t i = 0; i < m.size(); ++i)
        CHECK(back.values()[i] == m.values()[i]);
}

TEST_CASE("pfm header precedes exactly width*height*4 payload bytes")
{
    const fs::path dir = scratch_dir("pfm_header");
    const std::string path = (dir / "map.pfm").string();
    write_pfm(float_exact_map(32, 32, 5u), path);
    const std::string raw = slurp(path);
    const std::string header = "Pf\n32 32\n-1.0\n";
    REQUIRE(raw.size() > header.size());
    CHECK(raw.substr(0, header.size()) == header);
    CHECK(raw.size() - header.size() == 4096);
}

TEST_CASE("pfm with a positive scale is read big-endian")
{
    const fs::path dir = scratch_dir("pfm_be");
    // 2x2 map: a b / c d with the bottom row (c d) stored first per PFM.
    const float a = 1.0f, b = 2.0f, c = -0.5f, d = 3.25f;
    std::string raw = "Pf\n2 2\n1.0\n";
    append_float_be(raw, c);
    append_float_be(raw, d);
    append_float_be(raw, a);
    append_float_be(raw, b);
    const fs::path path = dir / "be.pfm";
    spit(path, raw);

    const RealMap m = read_pfm(path.string());
    REQUIRE(m.width() == 2);
    REQUIRE(m.height() == 2);
    CHECK(m.at(0, 0) == doctest::Approx(1.0));
    CHECK(m.at(1, 0) == doctest::Approx(2.0));
    CHECK(m.at(0, 1) == doctest::Approx(-0.5));
    CHECK(m.at(1, 1) == doctest::Approx(3.25));
}

TEST_CASE("pfm rejects malformed input and non-finite output")
{
    const fs::path dir = scratch_dir("pfm_errors");

    spit(dir / "magic.pfm", "PF\n2 2\n-1.0\n0123456789abcdef");
    CHECK_THROWS(read_pfm((dir / "magic.pfm").string()));

    spit(dir / "short.pfm", "Pf\n2 2\n-1.0\n0123"); // 4 of 16 payload bytes
    CHECK_THROWS(read_pfm((dir / "short.pfm").string()));

    std::string oversize = "Pf\n2 2\n-1.0\n";
    oversize.append(20, '\0'); // 16 expected, 20 given
    spit(dir / "long.pfm", oversize);
    CHECK_THROWS(read_pfm((dir / "long.pfm").string()));

    CHECK_THROWS(read_pfm((dir / "missing.pfm").string()));

    RealMap nan_map(2, 2, 0.0);
    nan_map.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(write_pfm(nan_map, (dir / "nan.pfm").string()));

    RealMap huge(2, 2, 1e300); // not representable in float32
    CHECK_THROWS(write_pfm(huge, (dir / "huge.pfm").string()));
}

TEST_CASE("pgm16 of a uniform unit map is all full-scale samples")
{
    const fs::path dir = scratch_dir("pgm_uniform");
    const std::string path = (dir / "flat.pgm").string();
    write_pgm16(RealMap(4, 4, 1.0), path);

    const std::string raw = slurp(path);
    const std::string header = "P5\n4 4\n65535\n";
    REQUIRE(raw.size() == header.size() + 32);
    CHECK(raw.substr(0, header.size()) == header);
    for (size_t i = header.size(); i < raw.size(); ++i)
        CHECK(static_cast<unsigned char>(raw[i]) == 0xFF);

    CHECK(slurp(dir / "flat.pgm.scale") == "scale=1\n");

    const RealMap back = read_pgm16(path);
    for (double v : back.values())
        CHECK(v == 1.0);
}

TEST_CASE("pgm16 of a zero map is all zero samples")
{
    const fs::path dir = scratch_dir("pgm_zero");
    const std::string path = (dir / "zero.pgm").string();
    write_pgm16(RealMap(3, 3, 0.0), path);
    const std::string raw = slurp(path);
    const std::string header = "P5\n3 3\n65535\n";
    for (size_t i = header.size(); i < raw.size(); ++i)
        CHECK(raw[i] == '\0');
    const RealMap back = read_pgm16(path);
    for (double v : back.values())
        CHECK(v == 0.0);
}

TEST_CASE("pgm16 round trip stays within the quantization bound")
{
    const fs::path dir = scratch_dir("pgm_quant");
    const RealMap m = qpi_test::random_map(16, 16, 7u, 0.0, 3.0);
    double scale = 0.0;
    for (double v : m.values())
        scale = std::max(scale, v);

    const std::string path = (dir / "img.pgm").string();
    write_pgm16(m, path);
    const RealMap back = read_pgm16(path);
    const double bound = scale / 65535.0;
    for (size_t i = 0; i < m.size(); ++i)
        CHECK(std::abs(back.values()[i] - m.values()[i]) <= bound);
}

TEST_CASE("pgm16 sidecar records the scale and defaults to one when absent")
{
    const fs::path dir = scratch_dir("pgm_sidecar");
    RealMap m(2, 2, 0.0);
    m.at(0, 0) = 2.0;
    m.at(1, 1) = 1.0;
    const std::string path = (dir / "img.pgm").string();
    write_pgm16(m, path);
    CHECK(slurp(dir / "img.pgm.scale") == "scale=2\n");
    CHECK(read_pgm16(path).at(0, 0) == doctest::Approx(2.0));

    fs::remove(dir / "img.pgm.scale");
    const RealMap unscaled = read_pgm16(path);
    CHECK(unscaled.at(0, 0) == doctest::Approx(1.0)); // full-scale sample, scale 1
    CHECK(unscaled.at(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("pgm16 rejects other maxvals and truncated payloads")
{
    const fs::path dir = scratch_dir("pgm_errors");

    spit(dir / "maxval.pgm", std::string("P5\n2 2\n255\n") + std::string(4, '\x01'));
    CHECK_THROWS(read_pgm16((dir / "maxval.pgm").string()));

    spit(dir / "short.pgm", std::string("P5\n2 2\n65535\n") + std::string(5, '\x01'));
    CHECK_THROWS(read_pgm16((dir / "short.pgm").string()));

    spit(dir / "magic.pgm", std::string("P6\n2 2\n65535\n") + std::string(8, '\x01'));
    CHECK_THROWS(read_pgm16((dir / "magic.pgm").string()));
}

TEST_CASE("trace csv layout: data rows plus fit comments")
{
    const fs::path dir = scratch_dir("csv_layout");
    ConvergenceTrace trace;
    for (int k = 0; k <= 3; ++k)
        trace.rms.push_back(std::pow(0.778, k));
    trace.self_residual = {0.1, 0.05, 0.02};
    trace.fitted_p = 1.0;
    trace.fitted_r = 0.778;

    const std::string path = (dir / "trace.csv").string();
    write_trace_csv(trace, path);

    const std::string raw = slurp(path);
    std::istringstream in(raw);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line))
        lines.push_back(line);
    REQUIRE(lines.size() == 7); // header + 4 data rows + 2 comments
    CHECK(lines[0] == "iter,rms,self_residual,ratio");
    CHECK(lines[5].rfind("# p=", 0) == 0);
    CHECK(lines[6].rfind("# r=", 0) == 0);

    // The ratio column of a geometric sequence is constant.
    for (size_t k = 2; k <= 4; ++k) {
        const size_t last_comma = lines[k].rfind(',');
        const double ratio = std::stod(lines[k].substr(last_comma + 1));
        CHECK(ratio == doctest::Approx(0.778).epsilon(1e-12));
    }
    // Row 0 has no ratio or self-residual.
    CHECK(lines[1] == "0,1,,");
}

TEST_CASE("trace csv round trip preserves every value")
{
    const fs::path dir = scratch_dir("csv_roundtrip");
    ConvergenceTrace trace;
    trace.rms = {0.2103, 0.0907, 0.041, 0.0003};
    trace.rms_raw = {}; // not serialized
    trace.self_residual = {0.11, 0.05, 0.021};
    trace.fitted_p = 1.0125;
    trace.fitted_r = 0.44721359549995793;

    const std::string path = (dir / "trace.csv").string();
    write_trace_csv(trace, path);
    const ConvergenceTrace back = read_trace_csv(path);

    REQUIRE(back.rms.size() == trace.rms.size());
    for (size_t i = 0; i < trace.rms.size(); ++i)
        CHECK(back.rms[i] == trace.rms[i]);
    REQUIRE(back.self_residual.size() == trace.self_residual.size());
    for (size_t i = 0; i < trace.self_residual.size(); ++i)
        CHECK(back.self_residual[i] == trace.self_residual[i]);
    CHECK(back.fitted_p == trace.fitted_p);
    CHECK(back.fitted_r == trace.fitted_r);
}

TEST_CASE("trace csv without ground truth keeps residuals only")
{
    const fs::path dir = scratch_dir("csv_residual");
    ConvergenceTrace trace;
    trace.self_residual = {0.3, 0.1, 0.04};

    const std::string path = (dir / "trace.csv").string();
    write_trace_csv(trace, path);

    const std::string raw = slurp(path);
    std::istringstream in(raw);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line))
        lines.push_back(line);
    REQUIRE(lines.size() == 7); // header + rows 0..3 + 2 comments
    CHECK(lines[1] == "0,,,");
    CHECK(lines[2] == "1,,0.29999999999999999,");

    const ConvergenceTrace back = read_trace_csv(path);
    CHECK(back.rms.empty());
    REQUIRE(back.self_residual.size() == 3);
    CHECK(back.self_residual[0] == 0.3);
    CHECK(std::isnan(back.fitted_p));
    CHECK(std::isnan(back.fitted_r));

    spit(dir / "bad.csv", "time,rms\n0,1\n");
    CHECK_THROWS(read_trace_csv((dir / "bad.csv").string()));
}

TEST_CASE("config serialization is a parse fixed point")
{
    ExperimentConfig cfg;
    cfg.recipe.kind = ObjectKind::PurePhase;
    cfg.recipe.size = 128;
    cfg.recipe.phase_range = kPi; // non-terminating decimal expansion
    cfg.recipe.seed = 42;
    cfg.window.width_px = 5;
    cfg.window.offset_x = -2;
    cfg.shifts.t2 = 2.0 * kPi / 3.0;
    cfg.pad_factor = 4;
    cfg.noise.kind = NoiseKind::AdditiveGaussian;
    cfg.noise.sigma = 0.013;
    cfg.iteration.max_iters = 40;
    cfg.iteration.self_residual_tol = 1e-11;
    cfg.output_dir = "out/run1";

    const std::string text = serialize_config(cfg);
    const ExperimentConfig parsed = parse_config(text);
    CHECK(serialize_config(parsed) == text);

    CHECK(parsed.recipe.kind == ObjectKind::PurePhase);
    CHECK(parsed.recipe.phase_range == cfg.recipe.phase_range);
    CHECK(parsed.shifts.t2 == cfg.shifts.t2);
    CHECK(parsed.noise.kind == NoiseKind::AdditiveGaussian);
    CHECK(parsed.noise.sigma == 0.013);
    CHECK(parsed.window.offset_x == -2);
    CHECK(parsed.output_dir == "out/run1");
}

TEST_CASE("config files round trip through disk")
{
    const fs::path dir = scratch_dir("config_file");
    ExperimentConfig cfg;
    cfg.recipe.kind = ObjectKind::Vortex;
    cfg.recipe.topological_number = 16;
    cfg.iteration.max_iters = 30;

    const std::string path = (dir / "run.cfg").string();
    save_config(cfg, path);
    const ExperimentConfig back = load_config(path);
    CHECK(serialize_config(back) == serialize_config(cfg));
}

TEST_CASE("config parsing accepts comments and rejects unknown keys by name")
{
    const ExperimentConfig cfg = parse_config(
        "# an experiment\n"
        "object.kind = purephase\n"
        "object.size = 64\n"
        "\n"
        "window.width_px=9   # inline comment\n"
        "iteration.max_iters = 10\n");
    CHECK(cfg.recipe.kind == ObjectKind::PurePhase);
    CHECK(cfg.recipe.size == 64);
    CHECK(cfg.window.width_px == 9);
    CHECK(cfg.iteration.max_iters == 10);

    try {
        parse_config("object.sizes = 64\n");
        FAIL("expected an unknown-key rejection");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("object.sizes") != std::string::npos);
    }

    CHECK_THROWS(parse_config("object.size = sixty-four\n"));
    CHECK_THROWS(parse_config("object.kind = hologram\n"));
    CHECK_THROWS(parse_config("noise.kind = shot\n"));
    CHECK_THROWS(parse_config("just a line without equals\n"));
}

TEST_CASE("config validation names the violated constraint")
{
    CHECK_THROWS(parse_config("window.width_px = 4\n"));   // even window
    CHECK_THROWS(parse_config("pad_factor = 0\n"));
    CHECK_THROWS(parse_config("iteration.max_iters = 0\n"));
    CHECK_THROWS(parse_config("noise.sigma = -0.5\nnoise.kind = gaussian\n"));
    CHECK_THROWS(parse_config("object.size = 13\n"));
    CHECK_THROWS(parse_config("import.enabled = true\n")); // import.phase missing

    const ExperimentConfig ok = parse_config(
        "import.enabled = true\n"
        "import.phase = phase.pfm\n");
    CHECK(ok.use_import);
    CHECK(ok.import_phase == "phase.pfm");
}

TEST_CASE("config single-key access mirrors the file keys")
{
    ExperimentConfig cfg;
    config_apply_key(cfg, "object.kind", "blobs");
    config_apply_key(cfg, "object.blob_count", "7");
    config_apply_key(cfg, "shifts.t3", "2.5");
    CHECK(cfg.recipe.kind == ObjectKind::Blobs);
    CHECK(cfg.recipe.blob_count == 7);
    CHECK(cfg.shifts.t3 == 2.5);

    CHECK(config_get_key(cfg, "object.kind") == "blobs");
    CHECK(config_get_key(cfg, "object.blob_count") == "7");
    CHECK(config_get_key(cfg, "shifts.t3") == "2.5");
    CHECK_THROWS(config_get_key(cfg, "nonsense"));
    CHECK_THROWS(config_apply_key(cfg, "nonsense", "1"));
}

TEST_CASE("window argument syntax")
{
    WindowSpec w = parse_window_arg("7x7");
    CHECK(w.width_px == 7);
    CHECK(w.height_px == 7);
    CHECK(w.offset_x == 0);
    CHECK(w.offset_y == 0);

    w = parse_window_arg("7x7+0+0");
    CHECK(w.width_px == 7);
    CHECK(w.offset_x == 0);

    w = parse_window_arg("5x3+4+-6");
    CHECK(w.width_px == 5);
    CHECK(w.height_px == 3);
    CHECK(w.offset_x == 4);
    CHECK(w.offset_y == -6);

    w = parse_window_arg("9x9+-2+3");
    CHECK(w.offset_x == -2);
    CHECK(w.offset_y == 3);

    CHECK_THROWS(parse_window_arg("7"));
    CHECK_THROWS(parse_window_arg("7x"));
    CHECK_THROWS(parse_window_arg("7x7+1"));
    CHECK_THROWS(parse_window_arg("axb"));
    CHECK_THROWS(parse_window_arg("7x7junk"));
    CHECK_THROWS(parse_window_arg(""));
}

TEST_CASE("atomic writes leave no temp files behind")
{
    const fs::path dir = scratch_dir("atomic");
    const fs::path path = dir / "report.txt";
    atomic_write_file(path.string(), "first\n");
    CHECK(slurp(path) == "first\n");
    atomic_write_file(path.string(), "second\n");
    CHECK(slurp(path) == "second\n");

    int entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir))
        ++entries;
    CHECK(entries == 1);
}
