#ifndef QPI_CORE_TYPES_HPP
#define QPI_CORE_TYPES_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpi {

using Complex = std::complex<double>;

/// Which plane of the 4f system a field lives on.
enum class Domain { Spatial, Frequency };

/// Dense 2D grid of real values, row-major, index (x, y) with y*width + x.
/// Used for amplitudes, phases (radians), intensities and binary masks.
class RealMap {
public:
    RealMap() = default;

    RealMap(int width, int height, double fill = 0.0)
        : width_(width), height_(height)
    {
        check_dims(width, height);
        values_.assign(static_cast<size_t>(width) * height, fill);
    }

    RealMap(int width, int height, std::vector<double> values)
        : width_(width), height_(height), values_(std::move(values))
    {
        check_dims(width, height);
        if (values_.size() != static_cast<size_t>(width) * height)
            throw std::invalid_argument("RealMap: value count does not match dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t size() const { return values_.size(); }

    double at(int x, int y) const { return values_[idx(x, y)]; }
    double& at(int x, int y) { return values_[idx(x, y)]; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool same_shape(const RealMap& other) const
    {
        return width_ == other.width_ && height_ == other.height_;
    }

private:
    static void check_dims(int w, int h)
    {
        if (w < 1 || h < 1)
            throw std::invalid_argument("RealMap: dimensions must be >= 1");
    }

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// Dense 2D grid of complex amplitudes tagged with the plane it belongs to.
class ComplexField {
public:
    ComplexField() = default;

    ComplexField(int width, int height, Domain domain, Complex fill = Complex(0.0, 0.0))
        : width_(width), height_(height), domain_(domain)
    {
        if (width < 1 || height < 1)
            throw std::invalid_argument("ComplexField: dimensions must be >= 1");
        values_.assign(static_cast<size_t>(width) * height, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    Domain domain() const { return domain_; }
    size_t size() const { return values_.size(); }

    Complex at(int x, int y) const { return values_[idx(x, y)]; }
    Complex& at(int x, int y) { return values_[idx(x, y)]; }

    const std::vector<Complex>& values() const { return values_; }
    std::vector<Complex>& values() { return values_; }

    bool same_shape(const ComplexField& other) const
    {
        return width_ == other.width_ && height_ == other.height_;
    }

private:
    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    Domain domain_ = Domain::Spatial;
    std::vector<Complex> values_;
};

/// Rectangular frequency-plane phase-shifting window. Dimensions must be odd
/// so the window is symmetric about the DC bin plus the given offset.
struct WindowSpec {
    int width_px = 7;
    int height_px = 7;
    int offset_x = 0;
    int offset_y = 0;
};

/// The three phase-shift values applied to the windowed spectrum, in radians.
struct PhaseShiftTriple {
    double t1 = 0.0;
    double t2 = 0.0;
    double t3 = 0.0;
};

} // namespace qpi

#endif
