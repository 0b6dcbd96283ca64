#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "fbembed/complex_plane.hpp"
#include "fbembed/polyfit.hpp"

// Planar conformal maps: Moebius transforms, the slit half-line map mu,
// least-squares Riemann maps with boundary-point normalization, and canonical
// parallel-slit maps for circular-boundary domains.

namespace fbembed {

/// (a z + b) / (c z + d), det != 0. Extends to the point at infinity.
struct MobiusMap {
    Complex a{1.0}, b{}, c{}, d{1.0};

    Complex det() const { return a * d - b * c; }

    static MobiusMap identity() { return {}; }
    static MobiusMap translation(Complex t) { return {1.0, t, 0.0, 1.0}; }
    static MobiusMap rotation(Complex unit) { return {unit, 0.0, 0.0, 1.0}; }
    static MobiusMap scale(Complex s) { return {s, 0.0, 0.0, 1.0}; }
    /// zeta -> 1 / (zeta - p)
    static MobiusMap pole_shift(Complex p) { return {0.0, 1.0, 1.0, -p}; }
    /// Disc automorphism moving alpha to 0.
    static MobiusMap disc_automorphism(Complex alpha) {
        return {1.0, -alpha, -std::conj(alpha), 1.0};
    }

    MobiusMap compose_after(const MobiusMap& g) const {  // (*this) o g
        return {a * g.a + b * g.c, a * g.b + b * g.d, c * g.a + d * g.c, c * g.b + d * g.d};
    }
    MobiusMap inverse() const { return {d, -b, -c, a}; }

    CPoint apply(const CPoint& p) const {
        if (p.infinite) {
            if (std::abs(c) == 0.0) return CPoint::infinity();
            return CPoint(a / c);
        }
        const Complex den = c * p.value + d;
        if (std::abs(den) == 0.0) return CPoint::infinity();
        return CPoint((a * p.value + b) / den);
    }
};

/// mu(zeta) = ((zeta+1)/(zeta-1))^2 - 1, the disc onto C \ L.
inline Complex mu(Complex zeta) {
    if (zeta == Complex(1.0, 0.0)) throw PoleError("mu: pole at zeta = 1");
    const Complex m = (zeta + 1.0) / (zeta - 1.0);
    return m * m - 1.0;
}

inline CPoint mu(const CPoint& p) {
    if (p.infinite) return CPoint(Complex{0.0, 0.0});
    if (p.value == Complex(1.0, 0.0)) return CPoint::infinity();
    return CPoint(mu(p.value));
}

/// Preimage of a target in C \ L under mu, inside the closed disc:
/// closed-form branch choice followed by Newton polish.
inline Complex mu_preimage(Complex target, int newton_steps = 8) {
    Complex m = std::sqrt(target + 1.0);  // principal branch, Re >= 0
    if (m.real() < 0.0) m = -m;
    Complex zeta = (m + 1.0) / (m - 1.0);
    if (std::abs(zeta) > 1.0) {
        m = -m;
        zeta = (m + 1.0) / (m - 1.0);
    }
    for (int it = 0; it < newton_steps; ++it) {
        const Complex w = (zeta + 1.0) / (zeta - 1.0);
        const Complex f = w * w - 1.0 - target;
        const Complex df = 2.0 * w * (-2.0) / ((zeta - 1.0) * (zeta - 1.0));
        if (std::abs(df) == 0.0) break;
        const Complex step = f / df;
        if (std::abs(step) < 1e-16) break;
        zeta -= step;
    }
    return zeta;
}

inline Complex mobius_pole_shift(Complex zeta, Complex p) {
    if (zeta == p) throw PoleError("mobius_pole_shift: zeta equals the pole");
    return 1.0 / (zeta - p);
}

inline CPoint mobius_pole_shift(const CPoint& zeta, const CPoint& p) {
    if (p.infinite) throw PreconditionError("mobius_pole_shift: pole at infinity");
    return MobiusMap::pole_shift(p.value).apply(zeta);
}

/// One canonical-slit-map boundary component: Laurent coefficients attached
/// to a circle (or a bare point, which carries none).
struct SlitBasisBlock {
    Complex center{};
    double radius = 0.0;
    bool exterior = false;  // true: basis ((z-center)/radius)^k, for bounded U
    std::vector<Complex> coeffs;
};

/// Fitted canonical parallel-slit map of an n-connected circular domain.
struct SlitMapSpec {
    CPoint normalization;  // a (finite or infinity)
    double inclination = 0.0;
    std::vector<SlitBasisBlock> blocks;
    Complex constant_shift{};  // subtracted so the expansion at a has no constant
    Complex alpha1{};
    double residual = 0.0;
    std::vector<double> cut_lengths;
    std::vector<bool> degenerate_cut_flags;  // cut shorter than 10 x residual

    Complex operator()(Complex z) const {
        Complex v = -constant_shift;
        if (normalization.infinite) {
            v += z;
        } else {
            const Complex den = z - normalization.value;
            if (std::abs(den) == 0.0) throw PoleError("slit map: pole at normalization point");
            v += 1.0 / den;
        }
        for (const auto& blk : blocks) {
            if (blk.radius <= 0.0) continue;
            const Complex base = blk.exterior ? (z - blk.center) / blk.radius
                                              : blk.radius / (z - blk.center);
            Complex pw = 1.0;
            for (const Complex& c : blk.coeffs) {
                pw *= base;
                v += c * pw;
            }
        }
        return v;
    }
};

/// A composable planar holomorphic map.
struct MapHandle;

/// Numerically fitted series map: p(z) = (z - center) * h(z) with h an
/// Arnoldi-basis polynomial; maps a Jordan region onto the unit disc.
struct SeriesMap {
    Complex center{};
    PolyFit factor;
    double boundary_residual = 0.0;
    Complex operator()(Complex z) const { return (z - center) * factor(z); }
};

struct MuTag {};

struct MapHandle {
    using Chain = std::vector<MapHandle>;
    std::variant<MobiusMap, MuTag, SeriesMap, SlitMapSpec, Chain> node;

    MapHandle() : node(MobiusMap::identity()) {}
    MapHandle(MobiusMap m) : node(m) {}
    MapHandle(MuTag t) : node(t) {}
    MapHandle(SeriesMap s) : node(std::move(s)) {}
    MapHandle(SlitMapSpec s) : node(std::move(s)) {}

    static MapHandle identity() { return MapHandle(MobiusMap::identity()); }
    static MapHandle mu_map() { return MapHandle(MuTag{}); }
    static MapHandle chain(std::vector<MapHandle> stages) {
        MapHandle h;
        h.node = std::move(stages);
        return h;
    }

    bool is_identity_mobius() const {
        if (const auto* m = std::get_if<MobiusMap>(&node))
            return m->a == Complex(1.0) && m->b == Complex{} && m->c == Complex{} &&
                   m->d == Complex(1.0);
        return false;
    }

    CPoint apply(const CPoint& p) const {
        return std::visit(
            [&](const auto& m) -> CPoint {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, MobiusMap>) {
                    return m.apply(p);
                } else if constexpr (std::is_same_v<T, MuTag>) {
                    return mu(p);
                } else if constexpr (std::is_same_v<T, Chain>) {
                    CPoint cur = p;
                    for (const auto& stage : m) cur = stage.apply(cur);
                    return cur;
                } else {
                    if (p.infinite)
                        throw PreconditionError("map handle: fitted map undefined at infinity");
                    return CPoint(m(p.value));
                }
            },
            node);
    }

    Complex operator()(Complex z) const {
        const CPoint out = apply(CPoint(z));
        if (out.infinite) throw PoleError("map handle: image at infinity");
        return out.value;
    }

    void append(MapHandle next) {
        if (auto* existing = std::get_if<Chain>(&node)) {
            existing->push_back(std::move(next));
        } else {
            Chain ch;
            ch.push_back(*this);
            ch.push_back(std::move(next));
            node = std::move(ch);
        }
    }
};

/// Min pairwise image gap over a probe set; 0 means the chain failed the
/// injectivity probe.
inline double injectivity_probe_gap(const MapHandle& h, const std::vector<Complex>& probe) {
    std::vector<Complex> images;
    images.reserve(probe.size());
    for (const Complex& z : probe) images.push_back(h(z));
    double gap = kInf;
    for (std::size_t i = 0; i < images.size(); ++i)
        for (std::size_t j = i + 1; j < images.size(); ++j)
            gap = std::min(gap, std::abs(images[i] - images[j]));
    return gap;
}

// ---------------------------------------------------------------------------
// Riemann maps
// ---------------------------------------------------------------------------

/// Descriptor of a simply connected region for riemann_map_fit.
struct SimplyConnectedRegion {
    enum class Kind { Disc, HalfPlane, Ellipse, Jordan } kind = Kind::Disc;
    Complex center{};
    double radius = 1.0;              // Disc
    Complex outward_normal{1.0, 0.0}; // HalfPlane: U = {Re((z-center)*conj(n)) < 0}
    double semi_axis_x = 1.0;         // Ellipse
    double semi_axis_y = 1.0;
    PlanarCurve boundary;             // Jordan: closed boundary curve

    static SimplyConnectedRegion disc(Complex c, double r) {
        SimplyConnectedRegion u;
        u.kind = Kind::Disc;
        u.center = c;
        u.radius = r;
        return u;
    }
    static SimplyConnectedRegion half_plane(Complex boundary_point, Complex outward_normal) {
        SimplyConnectedRegion u;
        u.kind = Kind::HalfPlane;
        u.center = boundary_point;
        u.outward_normal = outward_normal;
        return u;
    }
    static SimplyConnectedRegion ellipse(Complex c, double ax, double ay) {
        SimplyConnectedRegion u;
        u.kind = Kind::Ellipse;
        u.center = c;
        u.semi_axis_x = ax;
        u.semi_axis_y = ay;
        return u;
    }
    static SimplyConnectedRegion jordan(PlanarCurve closed_boundary) {
        SimplyConnectedRegion u;
        u.kind = Kind::Jordan;
        u.boundary = std::move(closed_boundary);
        return u;
    }
};

struct RiemannFitBudget {
    double tolerance = 1e-6;
    int degree_budget = 128;
    int boundary_samples = 512;
    int max_alternations = 600;
};

namespace detail {

/// Alternating boundary-correspondence least squares: fit p = (z-c) h(z)
/// against unimodular targets, re-estimating the boundary phases from the
/// current fit each round.
inline SeriesMap fit_disc_map_boundary(const std::vector<Complex>& boundary, Complex anchor,
                                       const RiemannFitBudget& budget) {
    const std::size_t m = boundary.size();
    std::vector<double> theta(m);
    for (std::size_t i = 0; i < m; ++i) theta[i] = std::arg(boundary[i] - anchor);

    std::vector<Complex> h_targets(m);
    SeriesMap best;
    best.center = anchor;
    best.boundary_residual = kInf;

    for (int degree = 16; degree <= budget.degree_budget; degree *= 2) {
        double prev = kInf;
        for (int iter = 0; iter < budget.max_alternations; ++iter) {
            for (std::size_t i = 0; i < m; ++i)
                h_targets[i] = std::polar(1.0, theta[i]) / (boundary[i] - anchor);
            PolyFit h = PolyFit::fit(boundary, h_targets, degree);
            SeriesMap cand;
            cand.center = anchor;
            cand.factor = h;
            double worst = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const Complex img = cand(boundary[i]);
                worst = std::max(worst, std::abs(std::abs(img) - 1.0));
                theta[i] = std::arg(img);
            }
            cand.boundary_residual = worst;
            if (worst < best.boundary_residual) best = cand;
            if (worst < budget.tolerance) return best;
            if (iter > 24 && worst > prev * 0.999) break;  // stalled at this degree
            prev = worst;
        }
        if (best.boundary_residual < budget.tolerance) break;
    }
    return best;
}

inline std::vector<Complex> region_boundary_samples(const SimplyConnectedRegion& u, int n) {
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(n));
    switch (u.kind) {
        case SimplyConnectedRegion::Kind::Ellipse:
            for (int k = 0; k < n; ++k) {
                const double t = 2.0 * M_PI * k / n;
                out.push_back(u.center +
                              Complex(u.semi_axis_x * std::cos(t), u.semi_axis_y * std::sin(t)));
            }
            break;
        case SimplyConnectedRegion::Kind::Jordan: {
            const auto& c = u.boundary;
            for (int k = 0; k < n; ++k)
                out.push_back(c.at(c.t0 + (c.t1 - c.t0) * static_cast<double>(k) / n));
            break;
        }
        default:
            break;
    }
    return out;
}

}  // namespace detail

struct RiemannFit {
    MapHandle map;           // U -> unit disc, trailing puncture images -> 1
    double residual = 0.0;   // boundary-correspondence residual
    std::vector<Complex> puncture_images;
};

/// Biholomorphism U -> disc with the trailing puncture images converging
/// toward 1. Closed forms for discs and half-planes, boundary least squares
/// otherwise.
inline RiemannFit riemann_map_fit(const SimplyConnectedRegion& u, const PunctureSet& punctures,
                                  const RiemannFitBudget& budget = {}) {
    MapHandle to_disc;
    double residual = 0.0;
    switch (u.kind) {
        case SimplyConnectedRegion::Kind::Disc:
            to_disc = MapHandle(MobiusMap{Complex(1.0 / u.radius),
                                          Complex(-u.center / u.radius), 0.0, 1.0});
            break;
        case SimplyConnectedRegion::Kind::HalfPlane: {
            // v = (z - b) conj(n)/|n| sends U to {Re v < 0}; then (1+v)/(1-v).
            const Complex n = u.outward_normal / std::abs(u.outward_normal);
            const MobiusMap flatten{std::conj(n), -u.center * std::conj(n), 0.0, 1.0};
            const MobiusMap cayley{1.0, 1.0, -1.0, 1.0};
            to_disc = MapHandle(cayley.compose_after(flatten));
            break;
        }
        default: {
            const auto boundary = detail::region_boundary_samples(u, budget.boundary_samples);
            Complex anchor{};
            if (u.kind == SimplyConnectedRegion::Kind::Ellipse) {
                anchor = u.center;
            } else {
                for (const Complex& z : boundary) anchor += z;
                anchor /= static_cast<double>(boundary.size());
            }
            SeriesMap fit = detail::fit_disc_map_boundary(boundary, anchor, budget);
            residual = fit.boundary_residual;
            if (residual > budget.tolerance)
                throw FitFailure("riemann_map_fit: boundary residual above budget", residual);
            to_disc = MapHandle(std::move(fit));
        }
    }

    RiemannFit out;
    out.residual = residual;
    out.map = to_disc;

    // Normalization: rotate the limit of the trailing puncture images to 1.
    std::vector<Complex> images;
    for (const Complex& p : punctures.points()) images.push_back(to_disc(p));
    if (!images.empty()) {
        const Complex w = images.back();
        if (std::abs(w) > 1e-12 && std::abs(std::conj(w) / std::abs(w) - 1.0) > 1e-14) {
            const MobiusMap rot = MobiusMap::rotation(std::conj(w) / std::abs(w));
            out.map.append(MapHandle(rot));
            for (Complex& im : images) im = rot.apply(CPoint(im)).value;
        }
        const std::size_t tail = std::min<std::size_t>(5, images.size());
        for (std::size_t i = images.size() - tail; i + 1 < images.size(); ++i)
            if (std::abs(images[i + 1] - 1.0) > std::abs(images[i] - 1.0) + 1e-12)
                throw FitFailure(
                    "riemann_map_fit: puncture images not converging toward 1", residual);
    }
    out.puncture_images = std::move(images);
    return out;
}

// ---------------------------------------------------------------------------
// Canonical parallel-slit maps (circular-boundary domains)
// ---------------------------------------------------------------------------

struct SlitFitBudget {
    double tolerance = 1e-6;
    int degree = 64;
    int samples_per_circle = 256;
};

/// Fits the canonical map of an n-connected circular domain onto the plane
/// with n parallel cuts of the given inclination. Complement components must
/// be discs or points; at most one may be unbounded (a disc exterior).
inline SlitMapSpec hilbert_slit_map_fit(const std::vector<ComplementComponent>& components,
                                        CPoint a, double theta,
                                        const SlitFitBudget& budget = {}) {
    for (const auto& k : components) {
        if (k.shape != ComponentShape::Disc && k.shape != ComponentShape::Point)
            throw PreconditionError("hilbert_slit_map_fit: only disc/point components supported");
        if (!a.infinite && dist_to_component(a.value, k) <= 0.0)
            throw PreconditionError("hilbert_slit_map_fit: normalization point not in U");
    }

    SlitMapSpec spec;
    spec.normalization = a;
    spec.inclination = theta;

    std::vector<std::size_t> circle_blocks;  // indices into spec.blocks with radius > 0
    for (const auto& k : components) {
        SlitBasisBlock blk;
        blk.center = k.center;
        blk.radius = (k.shape == ComponentShape::Point) ? 0.0 : k.radius;
        blk.exterior = (k.shape == ComponentShape::Disc && !k.bounded);
        if (blk.radius > 0.0) {
            blk.coeffs.assign(static_cast<std::size_t>(budget.degree), Complex{});
            circle_blocks.push_back(spec.blocks.size());
        }
        spec.blocks.push_back(std::move(blk));
    }

    if (circle_blocks.empty()) {
        // no cuts: the singular part alone is the map
        spec.residual = 0.0;
        if (!a.infinite) {
            spec.alpha1 = 0.0;
        }
        return spec;
    }

    const Complex rot = std::polar(1.0, -theta);
    auto singular = [&](Complex z) -> Complex {
        return a.infinite ? z : 1.0 / (z - a.value);
    };
    auto basis_value = [&](std::size_t blk_idx, int k, Complex z) -> Complex {
        const auto& blk = spec.blocks[blk_idx];
        const Complex base =
            blk.exterior ? (z - blk.center) / blk.radius : blk.radius / (z - blk.center);
        Complex pw = 1.0;
        for (int i = 0; i < k; ++i) pw *= base;
        return pw;
    };

    // rows: Im(rot * F(z)) - beta_circle = 0 at samples of every circle
    const int per = budget.samples_per_circle;
    const auto n_coeff = static_cast<Eigen::Index>(circle_blocks.size()) * budget.degree;
    const auto n_unknown = 2 * n_coeff + static_cast<Eigen::Index>(circle_blocks.size());
    const auto n_rows = static_cast<Eigen::Index>(circle_blocks.size()) * per;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_rows, n_unknown);
    Eigen::VectorXd rhs(n_rows);

    std::vector<std::vector<Complex>> samples(circle_blocks.size());
    for (std::size_t ci = 0; ci < circle_blocks.size(); ++ci) {
        const auto& blk = spec.blocks[circle_blocks[ci]];
        samples[ci] = circle_samples(blk.center, blk.radius, per);
    }

    Eigen::Index row = 0;
    for (std::size_t ci = 0; ci < circle_blocks.size(); ++ci) {
        for (const Complex& z : samples[ci]) {
            Eigen::Index col = 0;
            for (std::size_t bj : circle_blocks) {
                for (int k = 1; k <= budget.degree; ++k) {
                    const Complex rv = rot * basis_value(bj, k, z);
                    A(row, col) = rv.imag();      // Re(c) coefficient
                    A(row, col + 1) = rv.real();  // Im(c) coefficient
                    col += 2;
                }
            }
            A(row, 2 * n_coeff + static_cast<Eigen::Index>(ci)) = -1.0;
            rhs(row) = -(rot * singular(z)).imag();
            ++row;
        }
    }

    Eigen::VectorXd sol = A.colPivHouseholderQr().solve(rhs);

    Eigen::Index col = 0;
    for (std::size_t bj : circle_blocks)
        for (int k = 1; k <= budget.degree; ++k) {
            spec.blocks[bj].coeffs[static_cast<std::size_t>(k - 1)] =
                Complex(sol(col), sol(col + 1));
            col += 2;
        }

    // normalize away the constant term of the expansion at a
    if (!a.infinite) {
        Complex smooth{};
        for (std::size_t bj : circle_blocks)
            for (int k = 1; k <= budget.degree; ++k)
                smooth += spec.blocks[bj].coeffs[static_cast<std::size_t>(k - 1)] *
                          basis_value(bj, k, a.value);
        spec.constant_shift = smooth;
        // alpha1 = d/dz of the smooth part at a (analytic derivative)
        Complex d1{};
        for (std::size_t bj : circle_blocks) {
            const auto& blk = spec.blocks[bj];
            for (int k = 1; k <= budget.degree; ++k) {
                const Complex c = blk.coeffs[static_cast<std::size_t>(k - 1)];
                if (blk.exterior) {
                    d1 += c * static_cast<double>(k) *
                          basis_value(bj, k - 1, a.value) / blk.radius;
                } else {
                    d1 += c * static_cast<double>(-k) * basis_value(bj, k, a.value) /
                          (a.value - blk.center);
                }
            }
        }
        spec.alpha1 = d1;
    } else {
        // alpha1 = coefficient of 1/z at infinity: only k=1 interior terms contribute
        Complex a1{};
        for (std::size_t bj : circle_blocks) {
            const auto& blk = spec.blocks[bj];
            if (!blk.exterior) a1 += blk.coeffs[0] * blk.radius;
        }
        spec.alpha1 = a1;
    }

    // residual (against the per-circle mean ordinate) + cut geometry
    double worst = 0.0;
    for (std::size_t ci = 0; ci < circle_blocks.size(); ++ci) {
        double lo = kInf, hi = -kInf, mean = 0.0;
        for (const Complex& z : samples[ci]) {
            const Complex img = rot * spec(z);
            lo = std::min(lo, img.real());
            hi = std::max(hi, img.real());
            mean += img.imag();
        }
        mean /= static_cast<double>(samples[ci].size());
        for (const Complex& z : samples[ci])
            worst = std::max(worst, std::abs((rot * spec(z)).imag() - mean));
        spec.cut_lengths.push_back(hi - lo);
    }
    spec.residual = worst;
    for (double len : spec.cut_lengths)
        spec.degenerate_cut_flags.push_back(len < 10.0 * spec.residual);

    if (worst > budget.tolerance)
        throw FitFailure("hilbert_slit_map_fit: collinearity residual above budget", worst);
    return spec;
}

}  // namespace fbembed
