#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

// Deterministic low-discrepancy sampling. All sup-norm style estimates in the
// toolkit draw their sample sets from here, so runs are replayable without a
// seed concept.

namespace fbembed {

using Complex = std::complex<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Van der Corput radical inverse in the given base.
inline double radical_inverse(std::uint64_t index, std::uint32_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double value = 0.0;
    double scale = inv;
    while (index > 0) {
        value += static_cast<double>(index % base) * scale;
        index /= base;
        scale *= inv;
    }
    return value;
}

/// d-dimensional Halton point (prime bases 2,3,5,7), index starts at 1.
template <std::size_t Dim>
std::array<double, Dim> halton_point(std::uint64_t index) {
    static_assert(Dim <= 4);
    constexpr std::array<std::uint32_t, 4> bases{2, 3, 5, 7};
    std::array<double, Dim> out{};
    for (std::size_t d = 0; d < Dim; ++d) out[d] = radical_inverse(index, bases[d]);
    return out;
}

/// n points covering the closed disc of the given radius around a center.
inline std::vector<Complex> disc_samples(Complex center, double radius, int n) {
    std::vector<Complex> pts;
    pts.reserve(static_cast<std::size_t>(n));
    std::uint64_t index = 1;
    while (static_cast<int>(pts.size()) < n) {
        auto h = halton_point<2>(index++);
        const double x = 2.0 * h[0] - 1.0;
        const double y = 2.0 * h[1] - 1.0;
        if (x * x + y * y <= 1.0) pts.push_back(center + radius * Complex(x, y));
    }
    return pts;
}

/// n points on the circle of the given radius around a center.
inline std::vector<Complex> circle_samples(Complex center, double radius, int n) {
    std::vector<Complex> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double theta = 2.0 * M_PI * radical_inverse(static_cast<std::uint64_t>(k) + 1, 2);
        pts.push_back(center + radius * std::polar(1.0, theta));
    }
    return pts;
}

struct C2Point {
    Complex z{};
    Complex w{};
    friend C2Point operator+(const C2Point& a, const C2Point& b) { return {a.z + b.z, a.w + b.w}; }
    friend C2Point operator-(const C2Point& a, const C2Point& b) { return {a.z - b.z, a.w - b.w}; }
    friend C2Point operator*(double s, const C2Point& a) { return {s * a.z, s * a.w}; }
};

inline double norm(const C2Point& x) {
    return std::sqrt(std::norm(x.z) + std::norm(x.w));
}

/// n points covering the closed ball of radius r in C^2.
inline std::vector<C2Point> ball_samples(double r, int n) {
    std::vector<C2Point> pts;
    pts.reserve(static_cast<std::size_t>(n));
    std::uint64_t index = 1;
    while (static_cast<int>(pts.size()) < n) {
        auto h = halton_point<4>(index++);
        const double a = 2.0 * h[0] - 1.0, b = 2.0 * h[1] - 1.0;
        const double c = 2.0 * h[2] - 1.0, d = 2.0 * h[3] - 1.0;
        if (a * a + b * b + c * c + d * d <= 1.0)
            pts.push_back({r * Complex(a, b), r * Complex(c, d)});
    }
    return pts;
}

/// n points on the sphere of radius r in C^2 (normalized ball samples).
inline std::vector<C2Point> sphere_samples(double r, int n) {
    std::vector<C2Point> pts;
    pts.reserve(static_cast<std::size_t>(n));
    std::uint64_t index = 1;
    while (static_cast<int>(pts.size()) < n) {
        auto h = halton_point<4>(index++);
        const double a = 2.0 * h[0] - 1.0, b = 2.0 * h[1] - 1.0;
        const double c = 2.0 * h[2] - 1.0, d = 2.0 * h[3] - 1.0;
        const double s = a * a + b * b + c * c + d * d;
        if (s > 1.0 || s < 1e-8) continue;
        const double inv = r / std::sqrt(s);
        pts.push_back({inv * Complex(a, b), inv * Complex(c, d)});
    }
    return pts;
}

}  // namespace fbembed
