#pragma once

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "fbembed/errors.hpp"
#include "fbembed/lowdisc.hpp"
#include "fbembed/polyfit.hpp"

// Exact algebra of the C^2 automorphisms used by the construction: linear
// maps, shears in either coordinate, compositions with exact inverses, and
// the contraction-hypothesis checkers.

namespace fbembed {

/// One entire shear coefficient function g with g(0) = 0, kept in the fitted
/// (Arnoldi recurrence) form so evaluation stays stable at high degree.
struct ShearFunction {
    ConstrainedPoly poly;

    ShearFunction() = default;
    ShearFunction(ConstrainedPoly p) : poly(std::move(p)) {}

    /// Explicit low-degree coefficients c_1 z + c_2 z^2 + ...
    static ShearFunction monomials(std::vector<Complex> coeffs) {
        // fit over a probe disc large enough to be exact for the degree
        const int d = static_cast<int>(coeffs.size());
        auto pts = disc_samples({0.0, 0.0}, 2.0, std::max(16, 4 * (d + 1)));
        pts.push_back({0.0, 0.0});
        std::vector<Complex> targets;
        targets.reserve(pts.size());
        for (const Complex& z : pts) {
            Complex v{};
            Complex pw = 1.0;
            for (const Complex& c : coeffs) {
                pw *= z;
                v += c * pw;
            }
            targets.push_back(v);
        }
        ConstrainedPoly p;
        p.poly = PolyFit::fit(pts, targets, d);
        p.offset = p.poly(Complex{0.0, 0.0});
        p.degree = d;
        p.residual = 0.0;
        ShearFunction f;
        f.poly = std::move(p);
        return f;
    }

    Complex operator()(Complex z) const { return scale * poly(z); }
    int degree() const { return poly.degree; }

    ShearFunction negated() const {
        ShearFunction f = *this;
        f.scale = -f.scale;
        return f;
    }

    double scale = 1.0;
};

struct Auto;

struct LinearAuto {
    // row-major 2x2 matrix
    Complex a{1.0}, b{}, c{}, d{1.0};
    Complex det() const { return a * d - b * c; }
};

struct WShearAuto {  // (z, w) -> (z, w + g(z))
    ShearFunction g;
};

struct ZShearAuto {  // (z, w) -> (z + h(w), w)
    ShearFunction h;
};

struct Auto {
    using Composition = std::vector<Auto>;
    std::variant<LinearAuto, WShearAuto, ZShearAuto, Composition> node;

    Auto() : node(LinearAuto{}) {}
    Auto(LinearAuto m) : node(m) {}
    Auto(WShearAuto s) : node(std::move(s)) {}
    Auto(ZShearAuto s) : node(std::move(s)) {}

    static Auto identity() { return Auto(LinearAuto{}); }
    static Auto linear(Complex a, Complex b, Complex c, Complex d) {
        LinearAuto m{a, b, c, d};
        if (std::abs(m.det()) == 0.0) throw PreconditionError("Auto: singular linear map");
        return Auto(m);
    }
    static Auto w_shear(ShearFunction g) { return Auto(WShearAuto{std::move(g)}); }
    static Auto z_shear(ShearFunction h) { return Auto(ZShearAuto{std::move(h)}); }
    /// Stages applied left-to-right in stored order.
    static Auto composition(std::vector<Auto> stages) {
        Auto f;
        f.node = std::move(stages);
        return f;
    }

    C2Point apply(const C2Point& x) const {
        return std::visit(
            [&](const auto& m) -> C2Point {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, LinearAuto>) {
                    return {m.a * x.z + m.b * x.w, m.c * x.z + m.d * x.w};
                } else if constexpr (std::is_same_v<T, WShearAuto>) {
                    return {x.z, x.w + m.g(x.z)};
                } else if constexpr (std::is_same_v<T, ZShearAuto>) {
                    return {x.z + m.h(x.w), x.w};
                } else {
                    C2Point cur = x;
                    for (const Auto& stage : m) cur = stage.apply(cur);
                    return cur;
                }
            },
            node);
    }

    C2Point apply_inverse(const C2Point& x) const {
        return std::visit(
            [&](const auto& m) -> C2Point {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, LinearAuto>) {
                    const Complex det = m.det();
                    return {(m.d * x.z - m.b * x.w) / det, (-m.c * x.z + m.a * x.w) / det};
                } else if constexpr (std::is_same_v<T, WShearAuto>) {
                    return {x.z, x.w - m.g(x.z)};
                } else if constexpr (std::is_same_v<T, ZShearAuto>) {
                    return {x.z - m.h(x.w), x.w};
                } else {
                    C2Point cur = x;
                    for (auto it = m.rbegin(); it != m.rend(); ++it)
                        cur = it->apply_inverse(cur);
                    return cur;
                }
            },
            node);
    }

    void append(Auto next) {
        if (auto* existing = std::get_if<Composition>(&node)) {
            existing->push_back(std::move(next));
        } else {
            Composition comp;
            comp.push_back(*this);
            comp.push_back(std::move(next));
            node = std::move(comp);
        }
    }
};

/// The inverse as an explicit forward automorphism (shears negate their
/// coefficient function, compositions reverse).
inline Auto inverse_of(const Auto& f) {
    return std::visit(
        [&](const auto& m) -> Auto {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearAuto>) {
                const Complex det = m.det();
                return Auto::linear(m.d / det, -m.b / det, -m.c / det, m.a / det);
            } else if constexpr (std::is_same_v<T, WShearAuto>) {
                return Auto::w_shear(m.g.negated());
            } else if constexpr (std::is_same_v<T, ZShearAuto>) {
                return Auto::z_shear(m.h.negated());
            } else {
                std::vector<Auto> stages;
                stages.reserve(m.size());
                for (auto it = m.rbegin(); it != m.rend(); ++it)
                    stages.push_back(inverse_of(*it));
                return Auto::composition(std::move(stages));
            }
        },
        f.node);
}

/// 2^{-s_exp} * identity; A itself is contraction_power(1).
inline Auto contraction_power(int s_exp) {
    if (s_exp < 0) throw PreconditionError("contraction_power: exponent must be >= 0");
    const double f = std::pow(2.0, -s_exp);
    return Auto::linear(f, 0.0, 0.0, f);
}

/// The unitary map (z, w) -> ((z+w)/sqrt2, (z-w)/sqrt2); its first coordinate
/// is the diagonal projection used by the projection-asymptotics checker.
inline Auto diagonal_rotation() {
    const double r = std::sqrt(0.5);
    return Auto::linear(r, r, r, -r);
}

struct ContractionParams {
    double s = 0.45;
    double r = 0.55;
    double delta = 0.05;
    double rho = 0.25;

    void validate() const {
        if (!(0.0 < s && s < r && r < 1.0))
            throw PreconditionError("ContractionParams: need 0 < s < r < 1");
        if (!(r * r < s)) throw PreconditionError("ContractionParams: need r^2 < s");
        if (!(delta > 0.0 && rho > 0.0))
            throw PreconditionError("ContractionParams: delta and rho must be > 0");
    }
};

struct SupEstimate {
    bool ok = false;
    double sup = 0.0;
    int samples = 0;
};

/// sup over the closed rho-ball of ||sigma(x) - A(x)||, estimated on a
/// deterministic low-discrepancy sample; ok iff the estimate is below delta.
inline SupEstimate star_condition_check(const Auto& sigma, const ContractionParams& params,
                                        int n_samples = 400) {
    if (n_samples < 100) throw PreconditionError("star_condition_check: need >= 100 samples");
    params.validate();
    SupEstimate est;
    est.samples = n_samples;
    const int n_ball = n_samples / 2;
    const int n_sphere = n_samples - n_ball;
    auto pts = ball_samples(params.rho, n_ball);
    const auto shell = sphere_samples(params.rho, n_sphere);
    pts.insert(pts.end(), shell.begin(), shell.end());
    for (const C2Point& x : pts) {
        const C2Point diff = sigma.apply(x) - C2Point{x.z * 0.5, x.w * 0.5};
        est.sup = std::max(est.sup, norm(diff));
    }
    est.ok = est.sup < params.delta;
    return est;
}

/// Checks s||x|| <= ||F(x)|| <= r||x|| on sampled points of the closed
/// delta-ball (minus the origin).
inline bool norm_bounds_check(const Auto& F, const ContractionParams& params,
                              int n_samples = 400) {
    if (n_samples < 100) throw PreconditionError("norm_bounds_check: need >= 100 samples");
    params.validate();
    const int n_ball = n_samples / 2;
    const int n_sphere = n_samples - n_ball;
    auto pts = ball_samples(params.delta, n_ball);
    const auto shell = sphere_samples(params.delta, n_sphere);
    pts.insert(pts.end(), shell.begin(), shell.end());
    for (const C2Point& x : pts) {
        const double nx = norm(x);
        if (nx < 1e-12) continue;
        const double ny = norm(F.apply(x));
        if (ny < params.s * nx || ny > params.r * nx) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Run-log serialization (tag + coefficient list, 17 significant digits)
// ---------------------------------------------------------------------------

namespace detail {
inline void put_scalar(std::ostringstream& os, double v) {
    os.precision(17);
    os << ' ' << v;
}
inline void put_complex(std::ostringstream& os, Complex c) {
    put_scalar(os, c.real());
    put_scalar(os, c.imag());
}
inline void serialize_auto(std::ostringstream& os, const Auto& f, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearAuto>) {
                os << pad << "linear";
                put_complex(os, m.a);
                put_complex(os, m.b);
                put_complex(os, m.c);
                put_complex(os, m.d);
                os << '\n';
            } else if constexpr (std::is_same_v<T, WShearAuto> ||
                                 std::is_same_v<T, ZShearAuto>) {
                os << pad << (std::is_same_v<T, WShearAuto> ? "w_shear" : "z_shear");
                const auto& fn = [&]() -> const ShearFunction& {
                    if constexpr (std::is_same_v<T, WShearAuto>) return m.g;
                    else return m.h;
                }();
                os << " degree " << fn.degree();
                // coefficients in a stable probe representation: values on a
                // fixed deterministic point set
                const auto probe = disc_samples({0.0, 0.0}, 1.0, 8);
                for (const Complex& z : probe) put_complex(os, fn(z));
                os << '\n';
            } else {
                os << pad << "composition " << m.size() << '\n';
                for (const Auto& stage : m) serialize_auto(os, stage, indent + 1);
            }
        },
        f.node);
}
}  // namespace detail

inline std::string serialize_auto(const Auto& f) {
    std::ostringstream os;
    detail::serialize_auto(os, f, 0);
    return os.str();
}

}  // namespace fbembed
