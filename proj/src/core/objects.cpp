#include "objects.hpp"

#include "metrics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace qpi {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Correlation length of the band-limited noise as a fraction of the grid
// size; chosen so desk-scale objects keep the iteration in its linear regime.
constexpr double kSmoothFraction = 1.0 / 32.0;

// Uniform in [0, 1) from the top 53 bits; avoids the implementation-defined
// std distributions so fixed seeds reproduce across platforms.
double uniform01(std::mt19937_64& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Box-Muller, same portability rationale.
double gaussian(std::mt19937_64& gen)
{
    double u1 = uniform01(gen);
    while (u1 <= 0.0)
        u1 = uniform01(gen);
    const double u2 = uniform01(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

// Separable periodic Gaussian blur.
void blur_periodic(RealMap& m, double sigma)
{
    const int w = m.width();
    const int h = m.height();
    int radius = static_cast<int>(std::ceil(4.0 * sigma));
    radius = std::min(radius, std::min(w, h) / 2);
    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[static_cast<size_t>(i + radius)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += kernel[static_cast<size_t>(i + radius)];
    }
    for (double& v : kernel)
        v /= sum;

    RealMap tmp(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[static_cast<size_t>(i + radius)] * m.at((x + i + w) % w, y);
            tmp.at(x, y) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[static_cast<size_t>(i + radius)] * tmp.at(x, (y + i + h) % h);
            m.at(x, y) = acc;
        }
}

// Maps a field onto [0, 1] with the min and max hit exactly; a constant
// field maps to all zeros.
void normalize01(RealMap& m)
{
    double lo = m.values()[0];
    double hi = m.values()[0];
    for (double v : m.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= lo) {
        for (double& v : m.values())
            v = 0.0;
        return;
    }
    const double inv = 1.0 / (hi - lo);
    for (double& v : m.values())
        v = (v - lo) * inv;
}

RealMap smooth_noise01(int size, std::mt19937_64& gen)
{
    RealMap m(size, size);
    for (double& v : m.values())
        v = gaussian(gen);
    blur_periodic(m, kSmoothFraction * size);
    normalize01(m);
    return m;
}

void check_recipe(const ObjectRecipe& r)
{
    if (r.size < 4 || r.size % 2 != 0)
        throw std::invalid_argument("generate: size must be even and >= 4");
    if (r.phase_range < 0.0)
        throw std::invalid_argument("generate: phase_range must be >= 0");
    if (r.amplitude_min <= 0.0)
        throw std::invalid_argument("generate: amplitude_min must be > 0");
    if (r.amplitude_contrast < 1.0)
        throw std::invalid_argument("generate: amplitude_contrast must be >= 1");
    if (r.kind == ObjectKind::Blobs && (r.blob_count < 0 || r.blob_radius <= 0.0))
        throw std::invalid_argument("generate: Blobs needs blob_count >= 0 and blob_radius > 0");
}

} // namespace

ObjectSpec generate(const ObjectRecipe& recipe)
{
    check_recipe(recipe);
    const int n = recipe.size;
    std::mt19937_64 gen(recipe.seed);

    RealMap amplitude(n, n, 1.0);
    RealMap phase(n, n, 0.0);

    switch (recipe.kind) {
    case ObjectKind::ComplexStructured: {
        RealMap amp_noise = smooth_noise01(n, gen);
        RealMap phase_noise = smooth_noise01(n, gen);
        const double amp_span = recipe.amplitude_min * (recipe.amplitude_contrast - 1.0);
        for (size_t i = 0; i < amplitude.size(); ++i) {
            amplitude.values()[i] = recipe.amplitude_min + amp_span * amp_noise.values()[i];
            phase.values()[i] = recipe.phase_range * phase_noise.values()[i];
        }
        break;
    }
    case ObjectKind::PurePhase: {
        RealMap phase_noise = smooth_noise01(n, gen);
        for (size_t i = 0; i < phase.size(); ++i)
            phase.values()[i] = recipe.phase_range * phase_noise.values()[i];
        break;
    }
    case ObjectKind::Blobs: {
        for (int b = 0; b < recipe.blob_count; ++b) {
            const double cx = uniform01(gen) * n;
            const double cy = uniform01(gen) * n;
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    // nearest periodic image of the blob center
                    double dx = std::fabs(x - cx);
                    double dy = std::fabs(y - cy);
                    dx = std::min(dx, n - dx);
                    dy = std::min(dy, n - dy);
                    const double d = std::sqrt(dx * dx + dy * dy);
                    if (d < recipe.blob_radius) {
                        const double c = std::cos(0.5 * kPi * d / recipe.blob_radius);
                        phase.at(x, y) += c * c;
                    }
                }
        }
        normalize01(phase);
        for (double& v : phase.values())
            v *= recipe.phase_range;
        break;
    }
    case ObjectKind::Vortex: {
        const double cx = n / 2;
        const double cy = n / 2;
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const double theta = std::atan2(y - cy, x - cx);
                double w = wrap_angle(recipe.topological_number * theta);
                if (w < 0.0)
                    w += 2.0 * kPi;
                phase.at(x, y) = w;
            }
        break;
    }
    case ObjectKind::TiltBackground: {
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                phase.at(x, y) = recipe.phase_range * x / (n - 1.0);
        break;
    }
    default:
        throw std::invalid_argument("generate: unknown object kind");
    }

    return ObjectSpec(std::move(amplitude), std::move(phase));
}

} // namespace qpi
