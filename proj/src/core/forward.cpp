#include "forward.hpp"

#include <cmath>
#include <random>

namespace qpi {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

void check_object(const ObjectSpec& obj)
{
    if (!obj.amplitude.same_shape(obj.phase) || !obj.amplitude.same_shape(obj.illumination))
        throw std::invalid_argument("ObjectSpec: amplitude, phase and illumination must share dimensions");
    if (obj.pad_factor < 1)
        throw std::invalid_argument("ObjectSpec: pad_factor must be a positive integer");
}

// Uniform double in [0,1) from the top 53 bits, then Box-Muller. Spelled out
// so the stream does not depend on the standard library's distributions.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1], keeps log() finite
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare_ = radius * std::sin(kTwoPi * u2);
        have_spare_ = true;
        return radius * std::cos(kTwoPi * u2);
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace

ObjectSpec::ObjectSpec(RealMap C, RealMap E, int pad)
    : amplitude(std::move(C)), phase(std::move(E)), pad_factor(pad)
{
    illumination = RealMap(amplitude.width(), amplitude.height(), 1.0);
    check_object(*this);
}

ObjectSpec::ObjectSpec(RealMap C, RealMap E, RealMap B, int pad)
    : amplitude(std::move(C)), phase(std::move(E)), illumination(std::move(B)), pad_factor(pad)
{
    check_object(*this);
}

RealMap ObjectSpec::combined_amplitude() const
{
    RealMap cbar(amplitude.width(), amplitude.height());
    for (size_t i = 0; i < cbar.size(); ++i)
        cbar.values()[i] = illumination.values()[i] * amplitude.values()[i];
    return cbar;
}

ComplexField windowed_lowpass(const ComplexField& field, const WindowSpec& window, int pad_factor)
{
    if (pad_factor < 1)
        throw std::invalid_argument("windowed_lowpass: pad_factor must be a positive integer");
    const int w = field.width();
    const int h = field.height();
    const int pw = w * pad_factor;
    const int ph = h * pad_factor;
    const RealMap mask = window_mask(window, pw, ph);

    ComplexField spectrum = dft2_centered(pad_center(field, pw, ph));
    for (size_t i = 0; i < spectrum.size(); ++i)
        if (mask.values()[i] == 0.0)
            spectrum.values()[i] = Complex(0.0, 0.0);
    return crop_center(idft2_centered(spectrum), w, h);
}

ComplexField propagate_with_modulation(const ObjectSpec& obj, const WindowSpec& window, double t)
{
    check_object(obj);
    const int w = obj.width();
    const int h = obj.height();
    const int pw = w * obj.pad_factor;
    const int ph = h * obj.pad_factor;
    const RealMap mask = window_mask(window, pw, ph);

    ComplexField field = from_amp_phase(obj.combined_amplitude(), obj.phase);
    ComplexField spectrum = dft2_centered(pad_center(field, pw, ph));
    // exp(i*t*w) = (1 - w) + exp(i*t)*w for a binary mask; pixels outside the
    // window are left untouched so no transcendental error leaks there.
    const Complex shift = std::polar(1.0, t);
    for (size_t i = 0; i < spectrum.size(); ++i)
        if (mask.values()[i] != 0.0)
            spectrum.values()[i] *= shift;
    return crop_center(idft2_centered(spectrum), w, h);
}

ComplexField reference_field(const ObjectSpec& obj, const WindowSpec& window)
{
    check_object(obj);
    ComplexField field = from_amp_phase(obj.combined_amplitude(), obj.phase);
    return windowed_lowpass(field, window, obj.pad_factor);
}

RealMap intensity(const ComplexField& field)
{
    RealMap out(field.width(), field.height());
    for (size_t i = 0; i < out.size(); ++i)
        out.values()[i] = std::norm(field.values()[i]);
    return out;
}

std::array<RealMap, 3> simulate_triple(const ObjectSpec& obj, const WindowSpec& window,
                                       const PhaseShiftTriple& shifts, const NoiseSpec& noise)
{
    const double shift_values[3] = {shifts.t1, shifts.t2, shifts.t3};
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            const double d = std::remainder(shift_values[a] - shift_values[b], kTwoPi);
            if (std::abs(d) < 1e-12)
                throw std::invalid_argument("simulate_triple: phase shifts must be pairwise distinct modulo 2*pi");
        }

    std::array<RealMap, 3> out = {
        apply_noise(intensity(propagate_with_modulation(obj, window, shifts.t1)), noise),
        apply_noise(intensity(propagate_with_modulation(obj, window, shifts.t2)), noise),
        apply_noise(intensity(propagate_with_modulation(obj, window, shifts.t3)), noise),
    };
    return out;
}

RealMap predicted_intensity(const RealMap& cbar, const RealMap& K,
                            const RealMap& E, const RealMap& P, double t)
{
    if (!cbar.same_shape(K) || !cbar.same_shape(E) || !cbar.same_shape(P))
        throw std::invalid_argument("predicted_intensity: all maps must share dimensions");
    const double ca = 2.0 * std::cos(t) - 2.0;
    const double sa = 2.0 * std::sin(t);
    RealMap out(cbar.width(), cbar.height());
    for (size_t i = 0; i < out.size(); ++i) {
        const double c = cbar.values()[i];
        const double k = K.values()[i];
        const double theta = E.values()[i] - P.values()[i];
        out.values()[i] = c * c + ca * (c * k * std::cos(theta) - k * k) + sa * c * k * std::sin(theta);
    }
    return out;
}

RealMap apply_noise(const RealMap& intensity_map, const NoiseSpec& noise)
{
    switch (noise.kind) {
    case NoiseKind::None:
        return intensity_map;
    case NoiseKind::AdditiveGaussian: {
        if (noise.sigma < 0.0)
            throw std::invalid_argument("apply_noise: sigma must be non-negative");
        GaussianStream stream(noise.seed);
        RealMap out = intensity_map;
        for (double& v : out.values())
            v += noise.sigma * stream.next();
        return out;
    }
    case NoiseKind::Quantize16: {
        double peak = 0.0;
        for (double v : intensity_map.values())
            peak = std::max(peak, v);
        if (peak <= 0.0)
            return RealMap(intensity_map.width(), intensity_map.height(), 0.0);
        RealMap out(intensity_map.width(), intensity_map.height());
        for (size_t i = 0; i < out.size(); ++i) {
            double level = std::round(intensity_map.values()[i] / peak * 65535.0);
            level = std::min(std::max(level, 0.0), 65535.0);
            out.values()[i] = level * peak / 65535.0;
        }
        return out;
    }
    }
    throw std::invalid_argument("apply_noise: unknown noise kind");
}

} // namespace qpi
