#include "field.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace qpi {

namespace {

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

// Out-of-place c2c transform of a row-major w x h array. FFTW's planner is
// not thread-safe; execution is.
void run_fftw(const Complex* in, Complex* out, int w, int h, int sign)
{
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(h, w,
                                reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                                reinterpret_cast<fftw_complex*>(out),
                                sign, FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
}

// Centered transform via index remapping around the DC pixel (w/2, h/2):
//   g(x, y) = f((x + cx) mod w, (y + cy) mod h)
//   H = FFT(g)
//   F(u, v) = H((u - cx) mod w, (v - cy) mod h) / sqrt(w*h)
ComplexField centered_transform(const ComplexField& field, int sign)
{
    const int w = field.width();
    const int h = field.height();
    const int cx = w / 2;
    const int cy = h / 2;

    std::vector<Complex> shifted(field.size());
    for (int y = 0; y < h; ++y) {
        const int ys = (y + cy) % h;
        for (int x = 0; x < w; ++x) {
            const int xs = (x + cx) % w;
            shifted[static_cast<size_t>(y) * w + x] = field.at(xs, ys);
        }
    }

    std::vector<Complex> transformed(field.size());
    run_fftw(shifted.data(), transformed.data(), w, h, sign);

    const Domain out_domain =
        field.domain() == Domain::Spatial ? Domain::Frequency : Domain::Spatial;
    ComplexField out(w, h, out_domain);
    const double scale = 1.0 / std::sqrt(static_cast<double>(w) * h);
    for (int v = 0; v < h; ++v) {
        const int vs = (v - cy + h) % h;
        for (int u = 0; u < w; ++u) {
            const int us = (u - cx + w) % w;
            out.at(u, v) = transformed[static_cast<size_t>(vs) * w + us] * scale;
        }
    }
    return out;
}

} // namespace

ComplexField from_amp_phase(const RealMap& amp, const RealMap& phase)
{
    if (!amp.same_shape(phase))
        throw std::invalid_argument("from_amp_phase: amplitude is " +
                                    std::to_string(amp.width()) + "x" + std::to_string(amp.height()) +
                                    " but phase is " +
                                    std::to_string(phase.width()) + "x" + std::to_string(phase.height()));
    ComplexField out(amp.width(), amp.height(), Domain::Spatial);
    for (size_t i = 0; i < out.size(); ++i) {
        const double a = amp.values()[i];
        if (a < 0.0)
            throw std::invalid_argument("from_amp_phase: amplitude must be non-negative");
        out.values()[i] = std::polar(a, phase.values()[i]);
    }
    return out;
}

ComplexField dft2_centered(const ComplexField& field)
{
    return centered_transform(field, FFTW_FORWARD);
}

ComplexField idft2_centered(const ComplexField& field)
{
    return centered_transform(field, FFTW_BACKWARD);
}

ComplexField pad_center(const ComplexField& field, int target_w, int target_h)
{
    const int w = field.width();
    const int h = field.height();
    if (target_w < w || target_h < h)
        throw std::invalid_argument("pad_center: target size smaller than source");
    ComplexField out(target_w, target_h, field.domain());
    const int ox = target_w / 2 - w / 2;
    const int oy = target_h / 2 - h / 2;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x + ox, y + oy) = field.at(x, y);
    return out;
}

ComplexField crop_center(const ComplexField& field, int target_w, int target_h)
{
    const int w = field.width();
    const int h = field.height();
    if (target_w > w || target_h > h)
        throw std::invalid_argument("crop_center: target size larger than source");
    ComplexField out(target_w, target_h, field.domain());
    const int ox = w / 2 - target_w / 2;
    const int oy = h / 2 - target_h / 2;
    for (int y = 0; y < target_h; ++y)
        for (int x = 0; x < target_w; ++x)
            out.at(x, y) = field.at(x + ox, y + oy);
    return out;
}

RealMap window_mask(const WindowSpec& spec, int grid_w, int grid_h)
{
    if (spec.width_px < 1 || spec.height_px < 1)
        throw std::invalid_argument("window_mask: window dimensions must be positive");
    if (spec.width_px % 2 == 0 || spec.height_px % 2 == 0)
        throw std::invalid_argument("window_mask: window dimensions must be odd");
    const int cx = grid_w / 2 + spec.offset_x;
    const int cy = grid_h / 2 + spec.offset_y;
    const int hw = (spec.width_px - 1) / 2;
    const int hh = (spec.height_px - 1) / 2;
    if (cx - hw < 0 || cx + hw >= grid_w || cy - hh < 0 || cy + hh >= grid_h)
        throw std::invalid_argument("window_mask: window does not fit inside the grid");
    RealMap mask(grid_w, grid_h, 0.0);
    for (int y = cy - hh; y <= cy + hh; ++y)
        for (int x = cx - hw; x <= cx + hw; ++x)
            mask.at(x, y) = 1.0;
    return mask;
}

double energy(const ComplexField& field)
{
    double e = 0.0;
    for (const Complex& z : field.values())
        e += std::norm(z);
    return e;
}

double energy(const RealMap& map)
{
    double e = 0.0;
    for (double v : map.values())
        e += v * v;
    return e;
}

} // namespace qpi
