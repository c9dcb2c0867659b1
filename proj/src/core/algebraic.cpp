#include "algebraic.hpp"

#include "field.hpp"

#include <cmath>
#include <sstream>

namespace qpi {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_same_shape(const RealMap& a, const RealMap& b, const char* what)
{
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": maps must share dimensions");
}

// atan2 with the -pi branch folded onto +pi so results lie in (-pi, pi].
double vector_arctan(double y, double x)
{
    double a = std::atan2(y, x);
    if (a <= -kPi)
        a += 2.0 * kPi;
    return a;
}

} // namespace

Mat3 build_modulation_matrix(const PhaseShiftTriple& shifts)
{
    Mat3 m;
    const double t[3] = {shifts.t1, shifts.t2, shifts.t3};
    for (int row = 0; row < 3; ++row) {
        m[row][0] = 1.0;
        m[row][1] = 2.0 * std::cos(t[row]) - 2.0;
        m[row][2] = 2.0 * std::sin(t[row]);
    }
    return m;
}

double det3(const Mat3& m)
{
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
         - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
         + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 invert3(const Mat3& m, double min_abs_det)
{
    const double det = det3(m);
    if (std::abs(det) < min_abs_det)
        throw std::invalid_argument("invert3: matrix is singular or near-singular");
    const double inv_det = 1.0 / det;
    Mat3 out;
    out[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det;
    out[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det;
    out[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det;
    out[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det;
    out[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det;
    out[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det;
    out[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det;
    out[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det;
    out[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det;
    return out;
}

RDecomposition decompose_R(const RealMap& i1, const RealMap& i2, const RealMap& i3,
                           const PhaseShiftTriple& shifts)
{
    check_same_shape(i1, i2, "decompose_R");
    check_same_shape(i1, i3, "decompose_R");

    const Mat3 t = build_modulation_matrix(shifts);
    const double det = det3(t);
    if (std::abs(det) < 1e-6) {
        std::ostringstream msg;
        msg << "decompose_R: modulation matrix for shifts {" << shifts.t1 << ", " << shifts.t2
            << ", " << shifts.t3 << "} is singular (|det| = " << std::abs(det) << ")";
        throw std::invalid_argument(msg.str());
    }
    const Mat3 inv = invert3(t);

    RDecomposition r;
    r.R1 = RealMap(i1.width(), i1.height());
    r.R2 = RealMap(i1.width(), i1.height());
    r.R3 = RealMap(i1.width(), i1.height());
    for (size_t i = 0; i < i1.size(); ++i) {
        const double v1 = i1.values()[i];
        const double v2 = i2.values()[i];
        const double v3 = i3.values()[i];
        double r1 = inv[0][0] * v1 + inv[0][1] * v2 + inv[0][2] * v3;
        if (r1 < 0.0) {
            r1 = 0.0;
            ++r.r1_clamped;
        }
        r.R1.values()[i] = r1;
        r.R2.values()[i] = inv[1][0] * v1 + inv[1][1] * v2 + inv[1][2] * v3;
        r.R3.values()[i] = inv[2][0] * v1 + inv[2][1] * v2 + inv[2][2] * v3;
    }
    return r;
}

KSquaredCandidates k_squared_candidates(const RDecomposition& r)
{
    KSquaredCandidates out;
    out.plus = RealMap(r.R1.width(), r.R1.height());
    out.minus = RealMap(r.R1.width(), r.R1.height());
    for (size_t i = 0; i < r.R1.size(); ++i) {
        const double r1 = r.R1.values()[i];
        const double r2 = r.R2.values()[i];
        const double r3 = r.R3.values()[i];
        const double b = r1 - 2.0 * r2;
        double disc = b * b - 4.0 * (r2 * r2 + r3 * r3);
        if (disc < 0.0) {
            disc = 0.0;
            ++out.discriminant_clamped;
        }
        const double root = std::sqrt(disc);
        out.plus.values()[i] = 0.5 * (b + root);
        out.minus.values()[i] = 0.5 * (b - root);
    }
    return out;
}

RealMap k_shape(const WindowSpec& window, int grid_w, int grid_h, int object_w, int object_h)
{
    if (object_w > grid_w || object_h > grid_h)
        throw std::invalid_argument("k_shape: object larger than grid");
    const RealMap mask = window_mask(window, grid_w, grid_h);
    ComplexField mask_field(grid_w, grid_h, Domain::Frequency);
    for (size_t i = 0; i < mask.size(); ++i)
        mask_field.values()[i] = Complex(mask.values()[i], 0.0);
    const ComplexField shape = crop_center(idft2_centered(mask_field), object_w, object_h);
    RealMap out(object_w, object_h);
    for (size_t i = 0; i < out.size(); ++i)
        out.values()[i] = std::abs(shape.values()[i]);
    return out;
}

KApproximation approximate_K(const RDecomposition& r, const WindowSpec& window,
                             int grid_w, int grid_h, int object_w, int object_h, KMode mode)
{
    KApproximation out;
    out.mode = mode;
    out.P = RealMap(object_w, object_h, 0.0);
    if (mode == KMode::Zero) {
        out.K = RealMap(object_w, object_h, 0.0);
        return out;
    }

    const KSquaredCandidates candidates = k_squared_candidates(r);
    double k2_max = 0.0;
    for (double v : candidates.plus.values())
        k2_max = std::max(k2_max, v);
    const double k_max = std::sqrt(std::max(k2_max, 0.0));

    RealMap shape = k_shape(window, grid_w, grid_h, object_w, object_h);
    double shape_max = 0.0;
    for (double v : shape.values())
        shape_max = std::max(shape_max, v);
    if (shape_max <= 0.0)
        throw std::invalid_argument("approximate_K: window shape has zero maximum");

    const double scale = k_max / shape_max;
    for (double& v : shape.values())
        v *= scale;
    out.K = std::move(shape);
    return out;
}

PhaseRecovery recover_phase_algebraic(const RDecomposition& r, const RealMap& K, const RealMap& P)
{
    check_same_shape(r.R2, K, "recover_phase_algebraic");
    check_same_shape(r.R2, P, "recover_phase_algebraic");
    PhaseRecovery out;
    out.phase = RealMap(K.width(), K.height());
    for (size_t i = 0; i < K.size(); ++i) {
        const double k = K.values()[i];
        const double denom = r.R2.values()[i] + k * k;
        const double numer = r.R3.values()[i];
        if (numer == 0.0 && denom == 0.0) {
            out.phase.values()[i] = P.values()[i];
            ++out.indeterminate;
        } else {
            out.phase.values()[i] = P.values()[i] + vector_arctan(numer, denom);
        }
    }
    return out;
}

AmplitudeRecovery recover_amplitude(const RealMap& r1, const RealMap& b, double b_floor)
{
    check_same_shape(r1, b, "recover_amplitude");
    AmplitudeRecovery out;
    out.amplitude = RealMap(r1.width(), r1.height());
    for (size_t i = 0; i < r1.size(); ++i) {
        double v = r1.values()[i];
        if (v < 0.0) {
            v = 0.0;
            ++out.r1_clamped;
        }
        const double illum = b.values()[i];
        if (illum <= b_floor) {
            out.amplitude.values()[i] = 0.0;
            ++out.low_illumination;
        } else {
            out.amplitude.values()[i] = std::sqrt(v) / illum;
        }
    }
    if (out.low_illumination == static_cast<std::int64_t>(r1.size()))
        throw std::invalid_argument("recover_amplitude: illumination below threshold everywhere");
    return out;
}

} // namespace qpi
