// Independent reference implementations used only by the test suites.
// These deliberately avoid the library's transform and linear-algebra paths
// so they can serve as oracles for them.
#ifndef QPI_TESTS_ORACLES_HPP
#define QPI_TESTS_ORACLES_HPP

#include "core/types.hpp"

#include <array>
#include <cmath>
#include <random>

namespace qpi_test {

inline constexpr double kPi = 3.14159265358979323846;

// Direct O(N^2)-per-bin summation of the centered unitary DFT:
//   F(u,v) = sum f(x,y) exp(-i*2*pi*((x-cx)(u-cx)/W + (y-cy)(v-cy)/H)) / sqrt(W*H)
// with cx = W/2, cy = H/2. sign = -1 is the forward transform, +1 the inverse.
inline qpi::ComplexField brute_force_dft2(const qpi::ComplexField& f, int sign)
{
    const int w = f.width();
    const int h = f.height();
    const int cx = w / 2;
    const int cy = h / 2;
    const qpi::Domain out_domain =
        f.domain() == qpi::Domain::Spatial ? qpi::Domain::Frequency : qpi::Domain::Spatial;
    qpi::ComplexField out(w, h, out_domain);
    const double scale = 1.0 / std::sqrt(static_cast<double>(w) * h);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            qpi::Complex acc(0.0, 0.0);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const double angle = sign * 2.0 * kPi *
                        (static_cast<double>(x - cx) * (u - cx) / w +
                         static_cast<double>(y - cy) * (v - cy) / h);
                    acc += f.at(x, y) * qpi::Complex(std::cos(angle), std::sin(angle));
                }
            }
            out.at(u, v) = acc * scale;
        }
    }
    return out;
}

// Cofactor expansion along the first row.
inline double det3_cofactor(const std::array<std::array<double, 3>, 3>& m)
{
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
         - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
         + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Closed-form magnitude of the centered unitary transform of a W_d-wide
// centered rectangle window along one axis: the Dirichlet kernel
//   D(m) = sin(pi*W_d*m/N) / sin(pi*m/N),  D(0) = W_d.
inline double dirichlet_kernel(int m, int window_px, int grid_px)
{
    if (m == 0)
        return static_cast<double>(window_px);
    const double num = std::sin(kPi * window_px * m / grid_px);
    const double den = std::sin(kPi * m / grid_px);
    return num / den;
}

inline qpi::ComplexField random_field(int w, int h, unsigned seed,
                                      qpi::Domain domain = qpi::Domain::Spatial)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    qpi::ComplexField f(w, h, domain);
    for (auto& z : f.values())
        z = qpi::Complex(dist(gen), dist(gen));
    return f;
}

inline qpi::RealMap random_map(int w, int h, unsigned seed, double lo = 0.0, double hi = 1.0)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    qpi::RealMap m(w, h);
    for (auto& v : m.values())
        v = dist(gen);
    return m;
}

inline double max_abs_diff(const qpi::ComplexField& a, const qpi::ComplexField& b)
{
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

inline double max_abs_diff(const qpi::RealMap& a, const qpi::RealMap& b)
{
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

} // namespace qpi_test

#endif
