#include "metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qpi {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRmsFloor = 1e-13;

void check_same_shape(const RealMap& a, const RealMap& b, const char* what)
{
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": maps must share dimensions");
}

} // namespace

double wrap_angle(double a)
{
    double w = std::remainder(a, 2.0 * kPi);
    if (w <= -kPi)
        w += 2.0 * kPi;
    return w;
}

double phase_rms(const RealMap& recovered, const RealMap& truth, bool remove_piston)
{
    check_same_shape(recovered, truth, "phase_rms");
    const size_t n = recovered.size();
    if (remove_piston) {
        std::vector<double> diff(n);
        double mean = 0.0;
        for (size_t i = 0; i < n; ++i) {
            diff[i] = wrap_angle(recovered.values()[i] - truth.values()[i]);
            mean += diff[i];
        }
        mean /= static_cast<double>(n);
        double acc = 0.0;
        for (double d : diff)
            acc += (d - mean) * (d - mean);
        return std::sqrt(acc / static_cast<double>(n));
    }
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = recovered.values()[i] - truth.values()[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

double rms_diff(const RealMap& a, const RealMap& b)
{
    check_same_shape(a, b, "rms_diff");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

ConvergenceFit estimate_convergence(const std::vector<double>& rms_sequence)
{
    size_t above_floor = 0;
    for (double v : rms_sequence)
        if (v > kRmsFloor)
            ++above_floor;
    if (above_floor < 6) {
        std::ostringstream msg;
        msg << "estimate_convergence: need at least 6 entries above the " << kRmsFloor
            << " floor, got " << above_floor;
        throw std::invalid_argument(msg.str());
    }

    // Consecutive pairs from iteration 2 on, stopping at the first entry that
    // has decayed to the floor.
    std::vector<std::pair<double, double>> points;
    for (size_t k = 2; k + 1 < rms_sequence.size(); ++k) {
        if (rms_sequence[k] <= kRmsFloor || rms_sequence[k + 1] <= kRmsFloor)
            break;
        points.emplace_back(std::log(rms_sequence[k]), std::log(rms_sequence[k + 1]));
    }
    if (points.size() < 2) {
        std::ostringstream msg;
        msg << "estimate_convergence: need at least 2 qualifying iteration pairs, got "
            << points.size();
        throw std::invalid_argument(msg.str());
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(points.size());
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300)
        throw std::invalid_argument("estimate_convergence: degenerate fit (constant sequence)");
    ConvergenceFit fit;
    fit.p = (n * sxy - sx * sy) / denom;
    fit.r = std::exp((sy - fit.p * sx) / n);
    return fit;
}

BackgroundResult background_eliminate(const RealMap& obj_amplitude, const RealMap& obj_phase,
                                      const RealMap& bg_amplitude, const RealMap& bg_phase,
                                      double amplitude_floor)
{
    check_same_shape(obj_amplitude, obj_phase, "background_eliminate");
    check_same_shape(obj_amplitude, bg_amplitude, "background_eliminate");
    check_same_shape(obj_amplitude, bg_phase, "background_eliminate");

    const size_t n = obj_amplitude.size();
    BackgroundResult out;
    out.amplitude = RealMap(obj_amplitude.width(), obj_amplitude.height());
    out.phase = RealMap(obj_amplitude.width(), obj_amplitude.height());
    for (size_t i = 0; i < n; ++i) {
        const double bg = bg_amplitude.values()[i];
        if (bg <= amplitude_floor) {
            out.amplitude.values()[i] = 0.0;
            ++out.flagged;
        } else {
            out.amplitude.values()[i] = obj_amplitude.values()[i] / bg;
        }
        out.phase.values()[i] = wrap_angle(obj_phase.values()[i] - bg_phase.values()[i]);
    }
    if (2 * out.flagged > static_cast<std::int64_t>(n))
        throw std::invalid_argument("background_eliminate: background amplitude below threshold on more than half the pixels");
    return out;
}

double theoretical_resolution(double beam_diameter, double focal_length, double wavelength)
{
    if (beam_diameter <= 0.0 || focal_length <= 0.0 || wavelength <= 0.0)
        throw std::invalid_argument("theoretical_resolution: all inputs must be positive");
    return wavelength * focal_length / beam_diameter;
}

} // namespace qpi
