#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "fbembed/complex_plane.hpp"
#include "fbembed/conformal.hpp"

// The rational proper map of a standard domain into C^2: coefficient
// selection for the pole series f, evaluation of omega(zeta) = (zeta, f(zeta)),
// the image curves, the projection-asymptotics checker, and properness probes.

namespace fbembed {

struct PoleTerm {
    Complex pole{};
    Complex coeff{};
};

/// f(zeta) = sum a_j/(zeta - q_j) + sum b_j/(zeta - p_j), truncated.
struct PoleSeries {
    std::vector<PoleTerm> slit_poles;      // (q_j, a_j)
    std::vector<PoleTerm> puncture_poles;  // (p_j, b_j), j <= truncation
    double strip_halfwidth = 0.0;          // sum |a|/dist(q,L) + sum |b|/dist(p,L)
    std::vector<double> thetas;            // projection directions per slit pole

    bool empty() const { return slit_poles.empty() && puncture_poles.empty(); }

    double dist_to_nearest_pole(Complex z) const {
        double best = kInf;
        for (const auto& t : slit_poles) best = std::min(best, std::abs(z - t.pole));
        for (const auto& t : puncture_poles) best = std::min(best, std::abs(z - t.pole));
        return best;
    }

    Complex operator()(Complex z) const {
        Complex v{};
        for (const auto& t : slit_poles) v += t.coeff / (z - t.pole);
        for (const auto& t : puncture_poles) v += t.coeff / (z - t.pole);
        return v;
    }
};

struct EmbeddedSurface {
    StandardDomain domain;
    PoleSeries f;
};

/// Coefficient rule: b_j = 2^{-j} min(1, dist(p_j, L)) gives compact
/// convergence and boundedness over L; a_j = c_j e^{i theta_j} with equally
/// spaced theta_j avoiding the L-direction pi.
inline PoleSeries choose_coefficients(const StandardDomain& S, int N) {
    PoleSeries out;
    const auto m = S.slits.size();
    for (std::size_t j = 0; j < m; ++j) {
        const Complex q = S.slits[j].start();
        if (S.has_half_line && dist_to_half_line(q) < 1e-9)
            throw StructuralError("choose_coefficients: slit start lies on L");
        const Complex c = S.slits[j].start_direction();
        const double theta =
            -M_PI + 2.0 * M_PI * static_cast<double>(j + 1) / static_cast<double>(m + 2);
        out.slit_poles.push_back({q, c * std::polar(1.0, theta)});
        out.thetas.push_back(theta);
    }
    const int count = std::min(N, S.punctures.truncation);
    for (int j = 1; j <= count; ++j) {
        const Complex p = S.punctures.rule(j);
        const double d = S.has_half_line ? dist_to_half_line(p) : kInf;
        out.puncture_poles.push_back(
            {p, Complex(std::pow(2.0, -j) * std::min(1.0, d), 0.0)});
    }
    if (S.has_half_line) {
        double strip = 0.0;
        for (const auto& t : out.slit_poles)
            strip += std::abs(t.coeff) / dist_to_half_line(t.pole);
        for (const auto& t : out.puncture_poles)
            strip += std::abs(t.coeff) / dist_to_half_line(t.pole);
        out.strip_halfwidth = strip;
    }
    return out;
}

inline C2Point omega(Complex zeta, const EmbeddedSurface& surf) {
    if (surf.f.dist_to_nearest_pole(zeta) < 1e-12)
        throw PoleError("omega: evaluation at a pole of f");
    return {zeta, surf.f(zeta)};
}

/// Sampled image curves gamma_1..gamma_m (slit images, endpoint-clustered)
/// plus the half-line image when L is present. Samples that land on a pole
/// are resampled with shifted clustering.
struct ImageCurves {
    std::vector<std::vector<C2Point>> curves;
    std::vector<std::vector<double>> params;  // source parameters per curve
    double strip_sup = 0.0;  // sup |Im((z+w)/sqrt2)| along the half-line image
};

inline ImageCurves image_curves(const EmbeddedSurface& surf, int samples_per_curve,
                                double half_line_cap = 64.0) {
    ImageCurves out;
    for (const auto& slit : surf.domain.slits) {
        auto ts = curve_parameters(slit, samples_per_curve + 1, Clustering::EndpointClustered);
        std::vector<C2Point> img;
        std::vector<double> ps;
        for (double t : ts) {
            if (t <= slit.t0) continue;  // pole at the slit start
            Complex z = slit.at(t);
            if (surf.f.dist_to_nearest_pole(z) < 1e-9) {
                const double shifted = t + (slit.t1 - slit.t0) * 1e-7;
                z = slit.at(std::min(shifted, slit.t1));
                if (surf.f.dist_to_nearest_pole(z) < 1e-9) continue;
            }
            img.push_back(omega(z, surf));
            ps.push_back(t);
        }
        out.curves.push_back(std::move(img));
        out.params.push_back(std::move(ps));
    }
    if (surf.domain.has_half_line) {
        std::vector<C2Point> img;
        std::vector<double> ps;
        const double inv_sqrt2 = std::sqrt(0.5);
        for (int k = 0; k < samples_per_curve; ++k) {
            const double t =
                half_line_cap * static_cast<double>(k) / (samples_per_curve - 1);
            const Complex z(-1.0 - t, 0.0);
            const C2Point x = omega(z, surf);
            out.strip_sup =
                std::max(out.strip_sup, std::abs((inv_sqrt2 * (x.z + x.w)).imag()));
            img.push_back(x);
            ps.push_back(t);
        }
        out.curves.push_back(std::move(img));
        out.params.push_back(std::move(ps));
    }
    return out;
}

struct Lemma2Report {
    bool verdict = false;
    double delta = 0.0;
    double R = 0.0;
    double worst_gap = 0.0;  // max |pi - l| over the dense sweep below delta
    std::vector<double> grid;
};

namespace detail {
inline double abs_pi(const PlanarCurve& gamma, Complex a, const MapHandle& eps, double t) {
    const Complex g = gamma.at(t);
    const Complex g0 = gamma.at(gamma.t0);
    return std::abs(std::sqrt(0.5) * (g + eps(g) + a / (g - g0)));
}
}  // namespace detail

/// Projection asymptotics along a curve leaving its start point: finds the
/// monotonicity threshold delta (grid scan plus bisection refinement of the
/// breakpoint) and the gap bound R over a dense sweep of t <= delta.
inline Lemma2Report lemma2_check(const PlanarCurve& gamma, Complex a, const MapHandle& eps,
                                 std::vector<double> t_grid) {
    if (std::abs(a) == 0.0) throw PreconditionError("lemma2_check: a must be nonzero");
    const Complex c = gamma.start_direction();
    if (std::abs(c) < 1e-6)
        throw PreconditionError("lemma2_check: degenerate tangent, need gamma'(0) != 0");
    std::sort(t_grid.begin(), t_grid.end());
    if (t_grid.size() < 3) throw PreconditionError("lemma2_check: grid too small");

    Lemma2Report rep;
    rep.grid = t_grid;

    std::vector<double> mag;
    mag.reserve(t_grid.size());
    for (double t : t_grid) mag.push_back(detail::abs_pi(gamma, a, eps, t));

    std::size_t good = 0;  // largest index with strict decrease on all pairs before it
    while (good + 1 < t_grid.size() && mag[good] > mag[good + 1]) ++good;
    if (good == 0) return rep;  // not even the first pair decreases

    double delta = t_grid[good];
    if (good + 1 < t_grid.size()) {
        // refine the breakpoint: bisect the sign change of d|pi|/dt
        auto slope = [&](double t) {
            const double h = t * 1e-6;
            return (detail::abs_pi(gamma, a, eps, t + h) -
                    detail::abs_pi(gamma, a, eps, t - h)) /
                   (2.0 * h);
        };
        // the grid pair can straddle the true minimum; pick the side of
        // t_grid[good] where the derivative changes sign
        double lo = t_grid[good], hi = t_grid[good + 1];
        if (slope(lo) >= 0.0) {
            hi = lo;
            lo = t_grid[good - 1];
        }
        if (slope(lo) < 0.0 && slope(hi) > 0.0) {
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (slope(mid) < 0.0 ? lo : hi) = mid;
            }
            delta = lo;
        }
    }
    rep.delta = delta;

    // dense sweep of |pi - l| on [t_min, delta]
    const Complex g0 = gamma.at(gamma.t0);
    const Complex base = g0 + eps(g0);
    const double t_min = t_grid.front();
    double worst = 0.0;
    const int n = 2000;
    for (int k = 0; k <= n; ++k) {
        const double t = t_min + (delta - t_min) * static_cast<double>(k) / n;
        const Complex g = gamma.at(t);
        const Complex pi = std::sqrt(0.5) * (g + eps(g) + a / (g - g0));
        const Complex l = std::sqrt(0.5) * (base + a / (c * t));
        worst = std::max(worst, std::abs(pi - l));
    }
    rep.worst_gap = worst;
    rep.R = worst;
    rep.verdict = true;
    return rep;
}

/// Default geometric grid t = 2^{-k}, k = k_max..0.
inline std::vector<double> geometric_grid(int k_max) {
    std::vector<double> out;
    for (int k = k_max; k >= 0; --k) out.push_back(std::pow(2.0, -k));
    return out;
}

struct PropernessReport {
    bool proper = false;
    int first_exceed_index = -1;  // 1-based; -1 when the norms never exceed M
};

/// Proper-along-sequence verdict: image norms eventually exceed M and are
/// nondecreasing over the last quarter of the sequence.
inline PropernessReport properness_probe(const std::function<C2Point(Complex)>& map,
                                         const std::vector<Complex>& approach, double M) {
    PropernessReport rep;
    std::vector<double> norms;
    norms.reserve(approach.size());
    for (const Complex& z : approach) norms.push_back(norm(map(z)));
    for (std::size_t i = 0; i < norms.size(); ++i)
        if (norms[i] > M) {
            rep.first_exceed_index = static_cast<int>(i) + 1;
            break;
        }
    if (rep.first_exceed_index < 0) return rep;
    bool tail_ok = norms.back() > M;
    const std::size_t q = norms.size() - norms.size() / 4;
    for (std::size_t i = q; i + 1 < norms.size(); ++i)
        if (norms[i + 1] < norms[i]) tail_ok = false;
    rep.proper = tail_ok;
    return rep;
}

}  // namespace fbembed
