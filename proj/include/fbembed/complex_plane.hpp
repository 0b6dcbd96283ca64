#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fbembed/errors.hpp"
#include "fbembed/lowdisc.hpp"

// Core planar geometry: points with an explicit infinity sentinel, curves,
// standard-domain descriptions, distance queries, and the flood-fill
// connectivity test on complements.

namespace fbembed {

/// A point of the extended plane. Infinity is a tag, never an IEEE special
/// stored in the coordinates.
struct CPoint {
    Complex value{};
    bool infinite = false;

    CPoint() = default;
    CPoint(Complex z) : value(z) {}
    CPoint(double re, double im) : value(re, im) {}
    static CPoint infinity() {
        CPoint p;
        p.infinite = true;
        return p;
    }
    double re() const { return value.real(); }
    double im() const { return value.imag(); }
};

/// Distance from z to the half-line L = {x <= -1, y = 0}.
inline double dist_to_half_line(Complex z) {
    if (z.real() <= -1.0) return std::abs(z.imag());
    return std::abs(z - Complex(-1.0, 0.0));
}

inline double dist_to_segment(Complex z, Complex a, Complex b) {
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(z - a);
    double t = ((z - a).real() * ab.real() + (z - a).imag() * ab.imag()) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(z - (a + t * ab));
}

enum class CurveKind { Segment, Ray, CircleArc, Analytic, Polyline };

enum class Clustering { Uniform, EndpointClustered };

/// A planar curve over a parameter interval. Closed forms keep an evaluator;
/// polylines keep ordered samples. t1 may be +inf for rays.
struct PlanarCurve {
    double t0 = 0.0;
    double t1 = 1.0;
    CurveKind kind = CurveKind::Segment;
    std::function<Complex(double)> eval;  // set for all kinds except Polyline
    std::vector<Complex> samples;         // set for Polyline
    bool reversed = false;
    int distance_resolution = 512;  // polyline density used for distance queries

    // closed-form parameters, kept for exact distance queries
    Complex seg_a{}, seg_b{};          // Segment endpoints
    Complex ray_origin{}, ray_dir{};   // Ray: origin + t*dir
    Complex arc_center{};              // CircleArc
    double arc_radius = 0.0;

    bool closed_form() const { return kind != CurveKind::Polyline; }

    Complex at(double t) const {
        double s = reversed ? (t0 + t1 - t) : t;
        if (kind == CurveKind::Polyline) {
            if (samples.size() < 2) return samples.empty() ? Complex{} : samples.front();
            const double u = (s - t0) / (t1 - t0) * static_cast<double>(samples.size() - 1);
            const auto i = static_cast<std::size_t>(
                std::clamp(u, 0.0, static_cast<double>(samples.size() - 2)));
            const double frac = u - static_cast<double>(i);
            return samples[i] + frac * (samples[i + 1] - samples[i]);
        }
        return eval(s);
    }

    Complex start() const { return at(t0); }

    /// Start direction l'(t0), closed form or finite difference.
    Complex start_direction() const {
        const double h = std::isfinite(t1) ? (t1 - t0) * 1e-7 : 1e-7;
        return (at(t0 + h) - at(t0)) / h;
    }

    static PlanarCurve segment(Complex a, Complex b) {
        PlanarCurve c;
        c.kind = CurveKind::Segment;
        c.seg_a = a;
        c.seg_b = b;
        c.eval = [a, b](double t) { return a + t * (b - a); };
        return c;
    }

    static PlanarCurve ray(Complex origin, Complex dir, double tmax = kInf) {
        PlanarCurve c;
        c.kind = CurveKind::Ray;
        c.t1 = tmax;
        c.ray_origin = origin;
        c.ray_dir = dir;
        c.eval = [origin, dir](double t) { return origin + t * dir; };
        return c;
    }

    static PlanarCurve circle(Complex center, double radius, double a0 = 0.0,
                              double a1 = 2.0 * M_PI) {
        PlanarCurve c;
        c.kind = CurveKind::CircleArc;
        c.t0 = a0;
        c.t1 = a1;
        c.arc_center = center;
        c.arc_radius = radius;
        c.eval = [center, radius](double t) { return center + radius * std::polar(1.0, t); };
        return c;
    }

    static PlanarCurve analytic(std::function<Complex(double)> fn, double a, double b) {
        PlanarCurve c;
        c.kind = CurveKind::Analytic;
        c.t0 = a;
        c.t1 = b;
        c.eval = std::move(fn);
        return c;
    }

    static PlanarCurve polyline(std::vector<Complex> pts, double a = 0.0, double b = 1.0) {
        PlanarCurve c;
        c.kind = CurveKind::Polyline;
        c.t0 = a;
        c.t1 = b;
        c.samples = std::move(pts);
        return c;
    }
};

/// n parameter-ordered points on c. Endpoint-clustered places half the points
/// in the first 10% of the interval (slit tips need dense coverage).
inline std::vector<Complex> sample_curve(const PlanarCurve& c, int n,
                                         Clustering clustering = Clustering::Uniform) {
    if (n < 2) throw PreconditionError("sample_curve: n must be >= 2");
    if (!std::isfinite(c.t1))
        throw PreconditionError("sample_curve: infinite parameter interval, pass a finite cap");
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(n));
    const double span = c.t1 - c.t0;
    if (clustering == Clustering::Uniform) {
        for (int k = 0; k < n; ++k)
            out.push_back(c.at(c.t0 + span * static_cast<double>(k) / (n - 1)));
    } else {
        const int head = n / 2;
        const double cut = c.t0 + 0.1 * span;
        for (int k = 0; k < head; ++k)
            out.push_back(c.at(c.t0 + 0.1 * span * static_cast<double>(k) / head));
        for (int k = 0; k < n - head; ++k)
            out.push_back(c.at(cut + 0.9 * span * static_cast<double>(k) /
                                         std::max(1, n - head - 1)));
    }
    return out;
}

inline std::vector<double> curve_parameters(const PlanarCurve& c, int n, Clustering clustering) {
    if (n < 2) throw PreconditionError("curve_parameters: n must be >= 2");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    const double span = c.t1 - c.t0;
    if (clustering == Clustering::Uniform) {
        for (int k = 0; k < n; ++k) out.push_back(c.t0 + span * static_cast<double>(k) / (n - 1));
    } else {
        const int head = n / 2;
        const double cut = c.t0 + 0.1 * span;
        for (int k = 0; k < head; ++k)
            out.push_back(c.t0 + 0.1 * span * static_cast<double>(k) / head);
        for (int k = 0; k < n - head; ++k)
            out.push_back(cut + 0.9 * span * static_cast<double>(k) / std::max(1, n - head - 1));
    }
    return out;
}

/// Exact distance for closed forms, polyline distance otherwise.
inline double dist_to_curve(Complex z, const PlanarCurve& c) {
    switch (c.kind) {
        case CurveKind::Segment:
            return dist_to_segment(z, c.seg_a, c.seg_b);
        case CurveKind::Ray: {
            if (!std::isfinite(c.t1)) {
                const Complex d = c.ray_dir;
                double t = ((z - c.ray_origin).real() * d.real() +
                            (z - c.ray_origin).imag() * d.imag()) /
                           std::norm(d);
                t = std::max(t, c.t0);
                return std::abs(z - (c.ray_origin + t * d));
            }
            return dist_to_segment(z, c.at(c.t0), c.at(c.t1));
        }
        case CurveKind::CircleArc: {
            const bool full = (c.t1 - c.t0) >= 2.0 * M_PI - 1e-12;
            if (full) return std::abs(std::abs(z - c.arc_center) - c.arc_radius);
            double ang = std::arg(z - c.arc_center);
            // bring into [t0, t0+2pi)
            while (ang < c.t0) ang += 2.0 * M_PI;
            if (ang <= c.t1) return std::abs(std::abs(z - c.arc_center) - c.arc_radius);
            return std::min(std::abs(z - c.at(c.t0)), std::abs(z - c.at(c.t1)));
        }
        default: {
            double best = kInf;
            if (c.kind == CurveKind::Polyline) {
                for (std::size_t i = 0; i + 1 < c.samples.size(); ++i)
                    best = std::min(best, dist_to_segment(z, c.samples[i], c.samples[i + 1]));
                if (c.samples.size() == 1) best = std::abs(z - c.samples[0]);
            } else {
                const int n = c.distance_resolution;
                Complex prev = c.at(c.t0);
                for (int k = 1; k <= n; ++k) {
                    const Complex cur =
                        c.at(c.t0 + (c.t1 - c.t0) * static_cast<double>(k) / n);
                    best = std::min(best, dist_to_segment(z, prev, cur));
                    prev = cur;
                }
            }
            return best;
        }
    }
}

/// Countable puncture sets: an explicit generator rule plus a truncation
/// index. All geometric queries use the truncated set.
struct PunctureSet {
    std::function<Complex(int)> rule;  // j = 1..truncation
    int truncation = 0;
    std::string description;

    bool empty() const { return truncation <= 0; }
    std::vector<Complex> points() const {
        std::vector<Complex> out;
        out.reserve(static_cast<std::size_t>(std::max(0, truncation)));
        for (int j = 1; j <= truncation; ++j) out.push_back(rule(j));
        return out;
    }

    static PunctureSet none() { return {}; }
    static PunctureSet from_rule(std::function<Complex(int)> r, int n, std::string desc = {}) {
        PunctureSet p;
        p.rule = std::move(r);
        p.truncation = n;
        p.description = std::move(desc);
        return p;
    }
    static PunctureSet from_list(std::vector<Complex> pts, std::string desc = {}) {
        PunctureSet p;
        p.truncation = static_cast<int>(pts.size());
        p.rule = [pts = std::move(pts)](int j) { return pts[static_cast<std::size_t>(j - 1)]; };
        p.description = std::move(desc);
        return p;
    }
};

/// S = C \ (L u slits u punctures). Any component may be absent.
struct StandardDomain {
    bool has_half_line = false;
    std::vector<PlanarCurve> slits;
    PunctureSet punctures;

    static StandardDomain plane_minus_L() {
        StandardDomain s;
        s.has_half_line = true;
        return s;
    }
};

namespace detail {
inline std::vector<Complex> boundary_probe(const PlanarCurve& c, int n) {
    if (c.kind == CurveKind::Polyline) return c.samples;
    const double cap = std::isfinite(c.t1) ? c.t1 : c.t0 + 64.0;
    std::vector<Complex> out;
    for (int k = 0; k <= n; ++k)
        out.push_back(c.at(c.t0 + (cap - c.t0) * static_cast<double>(k) / n));
    return out;
}
}  // namespace detail

/// Checks pairwise disjointness of L, slits and punctures at sampled
/// resolution. Throws StructuralError on violation.
inline void validate_standard_domain(const StandardDomain& s, double min_gap = 1e-9) {
    const auto punctures = s.punctures.points();
    for (std::size_t i = 0; i < s.slits.size(); ++i) {
        const auto probe = detail::boundary_probe(s.slits[i], 256);
        for (const Complex& z : probe) {
            if (s.has_half_line && dist_to_half_line(z) < min_gap)
                throw StructuralError("standard domain: slit touches L");
            for (std::size_t j = 0; j < s.slits.size(); ++j)
                if (j != i && dist_to_curve(z, s.slits[j]) < min_gap)
                    throw StructuralError("standard domain: slits intersect");
        }
    }
    for (const Complex& p : punctures) {
        if (s.has_half_line && dist_to_half_line(p) < min_gap)
            throw StructuralError("standard domain: puncture on L");
        for (const auto& slit : s.slits)
            if (dist_to_curve(p, slit) < min_gap)
                throw StructuralError("standard domain: puncture on a slit");
    }
}

/// Inf distance from z to L u slits u punctures; +inf for the full plane.
inline double dist_to_standard_boundary(Complex z, const StandardDomain& s) {
    double best = kInf;
    if (s.has_half_line) best = std::min(best, dist_to_half_line(z));
    for (const auto& c : s.slits) best = std::min(best, dist_to_curve(z, c));
    for (int j = 1; j <= s.punctures.truncation; ++j)
        best = std::min(best, std::abs(z - s.punctures.rule(j)));
    return best;
}

/// Rasterizes closure(disc_R) u curves over [-window,window]^2 and flood-fills
/// the complement from the border. True iff every complement cell is reached,
/// i.e. no relatively compact complement components at this resolution.
inline bool no_compact_complement_components(double R,
                                             const std::vector<PlanarCurve>& projected_curves,
                                             double window, int resolution) {
    if (R <= 0.0) throw PreconditionError("no_compact_complement_components: R must be > 0");
    if (resolution < 64)
        throw PreconditionError("no_compact_complement_components: resolution must be >= 64");
    const double cell = 2.0 * window / resolution;

    // distinct curves closer than 2 cells cannot be separated on this grid
    if (projected_curves.size() > 1) {
        std::vector<std::vector<Complex>> probes;
        for (const auto& c : projected_curves)
            probes.push_back(detail::boundary_probe(c, 512));
        for (std::size_t i = 0; i < probes.size(); ++i)
            for (std::size_t j = i + 1; j < probes.size(); ++j)
                for (const Complex& z : probes[i])
                    for (const Complex& w : probes[j])
                        if (std::abs(z - w) < 2.0 * cell)
                            throw PrecisionError(
                                "no_compact_complement_components: curve gap below 2 cells");
    }

    const int n = resolution;
    std::vector<char> blocked(static_cast<std::size_t>(n) * n, 0);
    auto idx = [n](int ix, int iy) { return static_cast<std::size_t>(iy) * n + ix; };
    auto cell_of = [&](Complex z) -> std::optional<std::pair<int, int>> {
        const int ix = static_cast<int>(std::floor((z.real() + window) / cell));
        const int iy = static_cast<int>(std::floor((z.imag() + window) / cell));
        if (ix < 0 || iy < 0 || ix >= n || iy >= n) return std::nullopt;
        return std::make_pair(ix, iy);
    };

    // closed disc of radius R
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const Complex center(-window + (ix + 0.5) * cell, -window + (iy + 0.5) * cell);
            if (std::abs(center) <= R + 0.5 * cell) blocked[idx(ix, iy)] = 1;
        }
    // curves, sampled densely relative to the grid
    for (const auto& c : projected_curves) {
        const double cap = std::isfinite(c.t1) ? c.t1 : c.t0 + 4.0 * window;
        const int steps = 16 * n;
        for (int k = 0; k <= steps; ++k) {
            const Complex z = c.at(c.t0 + (cap - c.t0) * static_cast<double>(k) / steps);
            if (auto cc = cell_of(z)) blocked[idx(cc->first, cc->second)] = 1;
        }
    }

    std::vector<char> reached(static_cast<std::size_t>(n) * n, 0);
    std::vector<std::pair<int, int>> stack;
    auto push = [&](int ix, int iy) {
        if (ix < 0 || iy < 0 || ix >= n || iy >= n) return;
        const auto i = idx(ix, iy);
        if (blocked[i] || reached[i]) return;
        reached[i] = 1;
        stack.emplace_back(ix, iy);
    };
    for (int k = 0; k < n; ++k) {
        push(k, 0);
        push(k, n - 1);
        push(0, k);
        push(n - 1, k);
    }
    while (!stack.empty()) {
        auto [ix, iy] = stack.back();
        stack.pop_back();
        push(ix + 1, iy);
        push(ix - 1, iy);
        push(ix, iy + 1);
        push(ix, iy - 1);
    }
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            if (!blocked[idx(ix, iy)] && !reached[idx(ix, iy)]) return false;
    return true;
}

enum class ComponentShape { Disc, Point, CurveArc, HalfPlane, PolylineRegion };

/// One complement component K_i of an n-connected domain.
struct ComplementComponent {
    ComponentShape shape = ComponentShape::Disc;
    bool bounded = true;
    Complex center{};       // Disc: center; Point: location; HalfPlane: boundary point
    double radius = 0.0;    // Disc
    Complex direction{1.0, 0.0};  // HalfPlane: outward normal of the kept side
    PlanarCurve curve;      // CurveArc / PolylineRegion boundary

    static ComplementComponent disc(Complex c, double r, bool bounded_side = true) {
        ComplementComponent k;
        k.shape = ComponentShape::Disc;
        k.center = c;
        k.radius = r;
        k.bounded = bounded_side;
        return k;
    }
    static ComplementComponent point(Complex p) {
        ComplementComponent k;
        k.shape = ComponentShape::Point;
        k.center = p;
        k.radius = 0.0;
        return k;
    }
    static ComplementComponent half_plane(Complex boundary_point, Complex outward_normal) {
        ComplementComponent k;
        k.shape = ComponentShape::HalfPlane;
        k.bounded = false;
        k.center = boundary_point;
        k.direction = outward_normal;
        return k;
    }
};

inline double dist_to_component(Complex z, const ComplementComponent& k) {
    switch (k.shape) {
        case ComponentShape::Point:
            return std::abs(z - k.center);
        case ComponentShape::Disc: {
            const double d = std::abs(z - k.center);
            if (k.bounded) return std::max(0.0, d - k.radius);      // K = closed disc
            return std::max(0.0, k.radius - d);                     // K = closed exterior
        }
        case ComponentShape::HalfPlane: {
            const Complex nrm = k.direction / std::abs(k.direction);
            const double side =
                (z - k.center).real() * nrm.real() + (z - k.center).imag() * nrm.imag();
            return std::max(0.0, -side);
        }
        default:
            return dist_to_curve(z, k.curve);
    }
}

/// The classifier's input: U = C \ union(K_i) with a regular puncture
/// sequence and its witness curve.
struct DomainSpec {
    std::vector<ComplementComponent> components;
    PunctureSet punctures;
    CPoint limit;          // p, finite or infinity
    PlanarCurve witness;   // gamma with gamma(1) = p, containing the p_j
    bool has_witness = false;
};

/// Checks the DomainSpec invariants at sampled resolution.
inline void validate_domain_spec(const DomainSpec& spec, double tol = 1e-7) {
    // components pairwise disjoint
    for (std::size_t i = 0; i < spec.components.size(); ++i)
        for (std::size_t j = i + 1; j < spec.components.size(); ++j) {
            const auto& a = spec.components[i];
            const auto& b = spec.components[j];
            double gap = kInf;
            if (a.shape == ComponentShape::Point) {
                gap = dist_to_component(a.center, b);
            } else if (b.shape == ComponentShape::Point) {
                gap = dist_to_component(b.center, a);
            } else if (a.shape == ComponentShape::Disc && b.shape == ComponentShape::Disc &&
                       a.bounded && b.bounded) {
                gap = std::abs(a.center - b.center) - a.radius - b.radius;
            } else {
                // sampled probe of a against b
                for (const Complex& z : circle_samples(a.center, std::max(a.radius, 1.0), 64))
                    gap = std::min(gap, dist_to_component(z, b));
            }
            if (gap <= 0.0) throw StructuralError("domain spec: complement components intersect");
        }
    // punctures on the witness curve, witness interior in U
    if (spec.has_witness) {
        for (const Complex& p : spec.punctures.points())
            if (dist_to_curve(p, spec.witness) > tol)
                throw StructuralError("domain spec: puncture off the witness curve");
        const auto probe = detail::boundary_probe(spec.witness, 256);
        for (std::size_t k = 0; k + 1 < probe.size(); ++k)  // skip the endpoint gamma(1)
            for (const auto& comp : spec.components)
                if (dist_to_component(probe[k], comp) <= 0.0)
                    throw StructuralError("domain spec: witness curve leaves U");
    }
}

}  // namespace fbembed
