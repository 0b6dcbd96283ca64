#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "fbembed/autos.hpp"
#include "fbembed/embedding.hpp"
#include "fbembed/io.hpp"
#include "fbembed/pusher.hpp"

// The inductive basin engine: compact exhaustion of the standard domain, the
// step construction F_{j+1} = A^s o F(j) o phi o F(j)^{-1} with its condition
// checks, membership probing, and slice rendering.
//
// The conjugated factor is realized in image coordinates: with
// psi = F(j) o phi o F(j)^{-1} the composite telescopes to
//   F(j+1) = A^{s_j} o psi_j o ... o A^{s_1} o psi_1 o A,
// so each step appends one synthesized automorphism psi acting on the current
// image of the construction (psi fixes the rho-ball samples and pushes the
// image curves F(j)(gamma_i) out of a ball that A^s maps clear of B_rho).
// Evaluation of F(j) is a forward sweep, linear in the number of steps.

namespace fbembed {

// ---------------------------------------------------------------------------
// Compact exhaustion C_j and K_j = omega(C_j)
// ---------------------------------------------------------------------------

inline double exhaustion_margin(int j) { return 1.0 / (j + 2); }

/// Distance to the vertical escape rays {p + it, t >= 0} chosen for the
/// punctures: the curves gamma_i approach each puncture along its ray, so the
/// exhaustion must keep clear of a tube around it.
inline double approach_ray_dist(const StandardDomain& S, Complex z) {
    double best = kInf;
    for (const Complex& p : S.punctures.points()) {
        const Complex d = z - p;
        best = std::min(best, d.imag() >= 0.0 ? std::abs(d.real()) : std::abs(d));
    }
    return best;
}

/// Clearance from the boundary plus the escape-ray tubes.
inline double basin_clearance(const StandardDomain& S, Complex z) {
    return std::min(dist_to_standard_boundary(z, S), approach_ray_dist(S, z));
}

inline bool exhaustion_contains(const StandardDomain& S, int j, Complex z) {
    return std::abs(z) <= static_cast<double>(j) &&
           basin_clearance(S, z) >= exhaustion_margin(j);
}

struct ExhaustionSamples {
    std::vector<Complex> C;
    std::vector<C2Point> K;
    double margin = 0.0;
};

/// Grid samples of the closed j-disc filtered by the boundary margin, paired
/// with their omega-images. grid_shift displaces the lattice for fresh
/// re-verification samples.
inline ExhaustionSamples compact_exhaustion(const EmbeddedSurface& surf, int j,
                                            int max_grid = 40, double grid_shift = 0.0) {
    if (j < 1) throw PreconditionError("compact_exhaustion: j must be >= 1");
    ExhaustionSamples out;
    out.margin = exhaustion_margin(j);
    const int n = std::min(max_grid, 12 * (j + 1));
    const double h = 2.0 * j / n;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const Complex z(-j + (ix + 0.5 + grid_shift) * h,
                            -j + (iy + 0.5 + grid_shift) * h);
            if (!exhaustion_contains(surf.domain, j, z)) continue;
            out.C.push_back(z);
            out.K.push_back(omega(z, surf));
        }
    if (out.C.empty())
        throw ExhaustionError(
            "compact_exhaustion: empty C_j; decrease the initial margin or enlarge the domain");
    return out;
}

/// Domain samples tracing the offset curve at distance d from each boundary
/// component (both sides of L plus its tip arc, circles around punctures and
/// slit vertices), clipped to the |z| <= max_abs disc and to points whose
/// true boundary distance is not shortened by another component.
inline std::vector<Complex> boundary_offset_samples(const StandardDomain& S, double d,
                                                    double along_step, double max_abs) {
    if (d <= 0.0 || along_step <= 0.0)
        throw PreconditionError("boundary_offset_samples: d and along_step must be > 0");
    std::vector<Complex> raw;
    if (S.has_half_line) {
        for (double x = -1.0; x >= -max_abs; x -= along_step) {
            raw.emplace_back(x, d);
            raw.emplace_back(x, -d);
        }
        const int arcs = std::max(4, static_cast<int>(M_PI * d / along_step));
        for (int k = 0; k <= arcs; ++k) {
            const double a = -M_PI / 2.0 + M_PI * k / arcs;
            raw.push_back(Complex(-1.0, 0.0) + d * std::polar(1.0, a));
        }
    }
    auto add_circle = [&](Complex c) {
        const int n = std::max(8, static_cast<int>(2.0 * M_PI * d / along_step));
        for (int k = 0; k < n; ++k) raw.push_back(c + d * std::polar(1.0, 2.0 * M_PI * k / n));
    };
    for (const Complex& p : S.punctures.points()) {
        add_circle(p);
        for (double t = 0.0; t <= max_abs; t += along_step) {
            raw.push_back(p + Complex(d, t));
            raw.push_back(p + Complex(-d, t));
        }
    }
    for (const auto& slit : S.slits) {
        const int n = std::max(8, static_cast<int>((slit.t1 - slit.t0) / along_step));
        for (int k = 0; k <= n; ++k)
            add_circle(slit.at(slit.t0 + (slit.t1 - slit.t0) * k / n));
    }
    std::vector<Complex> out;
    for (const Complex& z : raw)
        if (std::abs(z) <= max_abs && basin_clearance(S, z) >= 0.999 * d)
            out.push_back(z);
    return out;
}

/// Near-puncture offset samples of a future band: the circle of radius d
/// around each puncture plus short tube-wall segments. Away from the
/// punctures a band's image stays inside the pinned projection discs, so only
/// these samples need pinning before their capture step.
inline std::vector<Complex> puncture_band_samples(const StandardDomain& S, double d,
                                                  double along_step, double height = 2.0) {
    if (d <= 0.0 || along_step <= 0.0)
        throw PreconditionError("puncture_band_samples: d and along_step must be > 0");
    std::vector<Complex> raw;
    for (const Complex& p : S.punctures.points()) {
        const int n = std::max(8, static_cast<int>(2.0 * M_PI * d / along_step));
        for (int k = 0; k < n; ++k) raw.push_back(p + d * std::polar(1.0, 2.0 * M_PI * k / n));
        for (double t = 0.0; t <= height; t += along_step) {
            raw.push_back(p + Complex(d, t));
            raw.push_back(p + Complex(-d, t));
        }
    }
    std::vector<Complex> out;
    for (const Complex& z : raw)
        if (basin_clearance(S, z) >= 0.999 * d) out.push_back(z);
    return out;
}

// ---------------------------------------------------------------------------
// Exponent and radius selection
// ---------------------------------------------------------------------------

using C2Map = std::function<C2Point(const C2Point&)>;

/// Smallest s with max ||A^s F(x)|| < rho/1.1 over the samples.
inline int choose_s(const C2Map& F, const std::vector<C2Point>& samples, double rho) {
    if (samples.empty()) throw PreconditionError("choose_s: empty sample set");
    double worst = 0.0;
    for (const C2Point& x : samples) worst = std::max(worst, norm(F(x)));
    int s = 0;
    while (std::pow(0.5, s) * worst >= rho / 1.1) ++s;
    return s;
}

/// Doubles R from rho until the sampled sphere of radius R has
/// min ||A^s F(x)|| > rho * 1.1 (sampled sufficient condition).
inline double choose_R(const C2Map& F, int s, double rho, int sphere_n = 200,
                       int max_doublings = 60) {
    double R = rho;
    const double contraction = std::pow(0.5, s);
    for (int k = 0; k < max_doublings; ++k) {
        R *= 2.0;
        double worst = kInf;
        for (const C2Point& x : sphere_samples(R, sphere_n))
            worst = std::min(worst, contraction * norm(F(x)));
        if (worst > rho * 1.1) return R;
    }
    throw StepFailure("choose_R: doubling cap reached without clearing the ball");
}

// ---------------------------------------------------------------------------
// Induction state
// ---------------------------------------------------------------------------

struct StepReport {
    int j = 0;
    int s = 0;
    double R = 0.0;
    int pusher_degree = 0;
    double supK_err = 0.0;
    double min_curve_norm = 0.0;
    std::string stage;
    bool cond1 = false;
    bool cond2 = false;
    bool cond3 = false;
};

struct InductionOptions {
    double push_eps = 0.02;
    int ball_probes = 96;
    int sphere_probes = 96;
    int exhaustion_grid = 32;
    int curve_samples = 256;
    int star_samples = 200;
    int sphere_samples_R = 128;
    // rail densification of the freshly exposed boundary band: the previous
    // step's shear has its steep transition there, so coarse grid samples
    // alone cannot pin the image of the band down to the eps tolerance
    int rails_per_band = 6;
    // number of future exhaustion bands whose near-puncture rails are pinned
    // ahead of their capture step: the pole part carries them out of the
    // pinned projection discs, so an unaware shear transition would fling
    // them; runs longer than this many steps need a larger value
    int rail_lookahead = 12;
    double rail_along_step = 0.05;
    // far-field guard: zero targets over |z| <= guard_radius away from an
    // opening cone around the boundary, keeping every fitted shear tame where
    // later exhaustion sets will land (polynomials explode off their samples)
    double guard_radius = 8.0;
    double guard_margin = 0.3;
    double guard_cone = 0.3;  // excluded sector half-width as a fraction of |z|
    int guard_grid = 36;
    // extra clearance between the contracted curve landing zone and B_rho
    double landing_margin = 1.6;
    // dyadic octaves sampled for the one-off curve hypothesis check
    double curve_span = 5.0;
    // octaves past the current contraction count covered by the active curve
    // window: samples beyond it have images too large to evaluate stably and
    // are out of every ball of interest anyway
    double curve_window_octaves = 5.0;
    PushBudgets push_budgets{.degree_budget = 128};
};

struct InductionState {
    EmbeddedSurface surf;
    ContractionParams params;
    InductionOptions opts;
    std::vector<Auto> pushers;  // psi_1..psi_{j-1}, image coordinates
    std::vector<int> s_values;  // s_1..s_{j-1}, each >= 1
    std::vector<StepReport> reports;
    std::vector<C2Point> K_samples;     // omega(C_{r_idx}) of the last accepted step
    std::vector<Complex> rail_domain;   // accumulated boundary rail samples
    int r_idx = 1;

    int steps() const { return 1 + static_cast<int>(pushers.size()); }  // j, base = 1
    int contraction_count() const {
        int m = 1;
        for (int s : s_values) m += s;
        return m;
    }
    int total_stages() const { return contraction_count(); }  // one A per stage

    // past this norm a polynomial shear can overflow to inf/nan; such points
    // are far outside every ball of interest, so only the contractions are
    // applied until the sweep brings them back into range
    static constexpr double far_clamp = 1e3;

    C2Point composite(const C2Point& x) const {  // F(j)
        C2Point cur = 0.5 * x;
        for (std::size_t k = 0; k < pushers.size(); ++k) {
            const double c = std::pow(0.5, s_values[k]);
            cur = norm(cur) > far_clamp ? c * cur : c * pushers[k].apply(cur);
        }
        return cur;
    }
    C2Point composite_inverse(const C2Point& x) const {
        C2Point cur = x;
        for (std::size_t k = pushers.size(); k >= 1; --k)
            cur = pushers[k - 1].apply_inverse(std::pow(2.0, s_values[k - 1]) * cur);
        return 2.0 * cur;
    }

    /// F(j) as a factored automorphism (A first, then psi_k and A^{s_k}).
    Auto composite_auto() const {
        std::vector<Auto> stages{contraction_power(1)};
        for (std::size_t k = 0; k < pushers.size(); ++k) {
            stages.push_back(pushers[k]);
            stages.push_back(contraction_power(s_values[k]));
        }
        return Auto::composition(std::move(stages));
    }
};

inline InductionState init_induction(EmbeddedSurface surf, ContractionParams params = {},
                                     InductionOptions opts = {}) {
    params.validate();
    InductionState st;
    st.surf = std::move(surf);
    st.params = params;
    st.opts = opts;
    st.r_idx = 1;
    st.K_samples = {C2Point{}};  // base case K_1 = {0}
    return st;
}

namespace detail {

inline double puncture_ray_scale(const EmbeddedSurface& surf, Complex p) {
    return 0.5 * std::min(1.0, surf.domain.has_half_line ? dist_to_half_line(p) : 1.0);
}

/// The boundary curves of the surface as space curves, parameterized so that a
/// uniform parameter grid samples every dyadic scale equally: slit images, the
/// half-line image zeta(u) = -2^u, and the escape-ray image
/// zeta(u) = p + i r0 2^{-u} through each puncture (deep end at large u).
inline std::vector<SpaceCurve> boundary_space_curves(const EmbeddedSurface& surf,
                                                     double span) {
    std::vector<SpaceCurve> out;
    for (const auto& slit : surf.domain.slits) {
        SpaceCurve c;
        const double s = slit.t1 - slit.t0;
        c.t0 = slit.t0 + 1e-3 * s;  // the slit start is a pole of f
        c.t1 = slit.t1;
        c.eval = [surf, slit](double t) { return omega(slit.at(t), surf); };
        out.push_back(std::move(c));
    }
    if (surf.domain.has_half_line) {
        SpaceCurve c;
        c.t0 = 0.0;
        c.t1 = span;
        c.eval = [surf](double u) { return omega(Complex(-std::pow(2.0, u), 0.0), surf); };
        out.push_back(std::move(c));
    }
    for (const auto& term : surf.f.puncture_poles) {
        SpaceCurve c;
        c.t0 = -span;
        c.t1 = span;
        const Complex p = term.pole;
        const double r0 = puncture_ray_scale(surf, p);
        c.eval = [surf, p, r0](double u) {
            return omega(p + Complex(0.0, r0 * std::pow(2.0, -u)), surf);
        };
        out.push_back(std::move(c));
    }
    return out;
}

/// The curve portions an induction step actually pushes and verifies: the
/// parts clear of the current exhaustion pinch and of the guard's reach, so
/// the push transition happens in the opening corridor rather than inside a
/// channel of pinned samples (the growth an entire function needs to rise from
/// ~0 on a disc to T just past its edge is exponential in the proximity, so
/// track_clear is kept at twice the guard radius): for the half-line
/// |zeta| >= track_clear; for an
/// escape ray the segment below eps_r / 2 of the puncture (escaping in the
/// second coordinate) and the segment above height track_clear. u_hi bounds
/// the sampled dyadic range so the mapped samples stay within the numerically
/// evaluable window.
inline std::vector<SpaceCurve> active_boundary_curves(const EmbeddedSurface& surf, int r,
                                                      double u_hi, double track_clear,
                                                      int ray_lookahead = 0) {
    std::vector<SpaceCurve> out;
    const double eps_r = exhaustion_margin(r + ray_lookahead);
    for (const auto& slit : surf.domain.slits) {
        SpaceCurve c;
        const double s = slit.t1 - slit.t0;
        c.t0 = slit.t0 + 1e-3 * s;
        c.t1 = slit.t1;
        c.eval = [surf, slit](double t) { return omega(slit.at(t), surf); };
        out.push_back(std::move(c));
    }
    if (surf.domain.has_half_line) {
        SpaceCurve c;
        c.t0 = std::log2(track_clear);
        c.t1 = u_hi;
        c.eval = [surf](double u) { return omega(Complex(-std::pow(2.0, u), 0.0), surf); };
        out.push_back(std::move(c));
    }
    for (const auto& term : surf.f.puncture_poles) {
        const Complex p = term.pole;
        const double r0 = puncture_ray_scale(surf, p);
        auto ray = [surf, p, r0](double u) {
            return omega(p + Complex(0.0, r0 * std::pow(2.0, -u)), surf);
        };
        SpaceCurve deep;
        // active deep window: clear of the lookahead pinch, and only the top
        // octaves so the conveyor window rides up with the contraction count
        // instead of sagging toward the ball
        deep.t0 = std::max(u_hi - 3.0, std::log2(r0 / (0.5 * eps_r)));
        deep.t1 = u_hi;
        deep.eval = ray;
        out.push_back(std::move(deep));
        SpaceCurve outer;
        outer.t0 = -u_hi;
        outer.t1 = std::log2(r0 / track_clear);
        outer.eval = ray;
        out.push_back(std::move(outer));
    }
    return out;
}

/// Hypothesis check in domain coordinates: the projected boundary curves must
/// not trap compact complement components beyond the exhaustion radius.
inline void check_curve_hypothesis(const EmbeddedSurface& surf, double span, int samples) {
    std::vector<PlanarCurve> projected;
    double extent = 1.0;
    for (const auto& c : boundary_space_curves(surf, span)) {
        std::vector<Complex> zs;
        for (const C2Point& x : c.sample(samples)) {
            zs.push_back(x.z);
            extent = std::max(extent, std::abs(x.z));
        }
        projected.push_back(PlanarCurve::polyline(std::move(zs)));
    }
    for (double r : {extent, 2.0 * extent})
        if (!no_compact_complement_components(r, projected, 2.5 * extent + r, 512))
            throw PreconditionError(
                "induction: projected boundary curves trap compact complement components");
}

}  // namespace detail

/// One accepted induction step; throws UnpushableError or StepFailure and
/// leaves the input state untouched on failure.
inline InductionState induction_step(const InductionState& state,
                                     const PushBudgets& budgets = {}) {
    const int j = state.steps();
    const int r = j + 1;
    const double rho = state.params.rho;
    const InductionOptions& o = state.opts;
    auto F = [&](const C2Point& x) { return state.composite(x); };

    if (j == 1) detail::check_curve_hypothesis(state.surf, o.curve_span, o.curve_samples);

    // newly exposed boundary band between the previous and current margins,
    // railed densely; rails accumulate across steps
    std::vector<Complex> rails = state.rail_domain;
    {
        const double lo = exhaustion_margin(r);
        const double hi = exhaustion_margin(r - 1);
        for (int i = 0; i < o.rails_per_band; ++i) {
            const double d = lo + (hi - lo) * i / std::max(1, o.rails_per_band - 1);
            const auto ring = boundary_offset_samples(state.surf.domain, d,
                                                      o.rail_along_step, r);
            rails.insert(rails.end(), ring.begin(), ring.end());
        }
    }

    // K' in domain coordinates: the exhaustion set, its rails, and the far
    // guard; choose_s sees the parts that condition (i) quantifies over
    const auto exh = compact_exhaustion(state.surf, r, o.exhaustion_grid);
    std::vector<C2Point> K_capture = exh.K;  // image must land in B_rho
    for (const Complex& z : rails) K_capture.push_back(omega(z, state.surf));
    const int s = std::max(1, choose_s(F, K_capture, rho));

    // the active curve portions mapped through F(j)
    std::vector<SpaceCurve> image_curves;
    const double u_hi = state.contraction_count() + o.curve_window_octaves;
    for (const auto& c : detail::active_boundary_curves(
             state.surf, r, u_hi, 2.0 * o.guard_radius, o.rail_lookahead)) {
        SpaceCurve img;
        img.t0 = c.t0;
        img.t1 = c.t1;
        const InductionState snap = state;  // freeze F(j) for the closure
        img.eval = [snap, c](double t) { return snap.composite(c.at(t)); };
        image_curves.push_back(std::move(img));
    }

    double R = choose_R([](const C2Point& x) { return x; }, s, rho, o.sphere_samples_R);
    while (std::pow(0.5, s) * R < o.landing_margin * rho) R *= 2.0;
    // the conveyor of contracting curve points must be re-pushed before it
    // sags toward the ball, where no coordinate projection separates it from
    // the pinned samples any more; when the coming contraction would drop the
    // curve floor below 3 rho, lift R just above the floor so the identity
    // cannot be accepted and the step pushes
    {
        double cmin = kInf;
        for (const auto& c : image_curves)
            for (const C2Point& x : c.sample(o.curve_samples))
                cmin = std::min(cmin, norm(x));
        if (std::pow(0.5, s) * cmin < 3.0 * rho) R = std::max(R, 1.05 * cmin);
    }

    // zero targets in image coordinates: B_rho itself (the image of
    // F(j)^{-1}(B_rho)), the captured sets, and the guard
    std::vector<C2Point> zero_img = ball_samples(rho, o.ball_probes);
    {
        const auto shell = sphere_samples(rho, o.sphere_probes);
        zero_img.insert(zero_img.end(), shell.begin(), shell.end());
        for (const C2Point& x : K_capture) zero_img.push_back(F(x));
        for (int q = r + 1; q <= r + o.rail_lookahead; ++q)
            for (const Complex& z : puncture_band_samples(
                     state.surf.domain, exhaustion_margin(q), o.rail_along_step))
                zero_img.push_back(F(omega(z, state.surf)));
        const int n = o.guard_grid;
        const double h = 2.0 * o.guard_radius / n;
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const Complex z(-o.guard_radius + (ix + 0.5) * h,
                                -o.guard_radius + (iy + 0.5) * h);
                if (std::abs(z) > o.guard_radius) continue;
                const StandardDomain& S = state.surf.domain;
                if (basin_clearance(S, z) < o.guard_margin) continue;
                // keep an opening cone around each escape track so the pushed
                // tails have an unobstructed corridor
                if (S.has_half_line &&
                    dist_to_half_line(z) < o.guard_cone * std::abs(z))
                    continue;
                bool in_cone = false;
                for (const Complex& p : S.punctures.points()) {
                    const Complex dd = z - p;
                    const double rd =
                        dd.imag() >= 0.0 ? std::abs(dd.real()) : std::abs(dd);
                    if (rd < o.guard_cone * std::abs(dd)) in_cone = true;
                }
                if (in_cone) continue;
                zero_img.push_back(F(omega(z, state.surf)));
            }
    }

    PushProblem prob;
    prob.K_samples = std::move(zero_img);
    prob.curves = std::move(image_curves);
    prob.R = R;
    prob.eps = o.push_eps;
    prob.curve_samples = o.curve_samples;
    prob.check_connectivity = false;  // verified on the domain projections above
    prob.budgets = budgets;
    const PushResult push = synthesize_push(prob);

    InductionState next = state;
    next.pushers.push_back(push.phi);
    next.s_values.push_back(s);
    next.r_idx = r;
    next.K_samples = exh.K;
    next.rail_domain = std::move(rails);
    auto Fnext = [&](const C2Point& x) { return next.composite(x); };

    // condition (1): the step's new factor A o psi is delta-close to A on the
    // rho-ball and keeps the Theorem-2 norm bounds; the remaining s-1 factors
    // are A itself
    const Auto G = Auto::composition({push.phi, contraction_power(1)});
    const bool cond1 = star_condition_check(G, state.params, o.star_samples).ok &&
                       norm_bounds_check(G, state.params);

    // condition (2): F(j+1)(K_{j+1}) inside B_rho, fresh shifted grid at 2x density
    bool cond2 = true;
    {
        const auto fresh = compact_exhaustion(state.surf, r, 2 * o.exhaustion_grid, 0.37);
        for (const C2Point& x : fresh.K)
            if (norm(Fnext(x)) >= rho * 1.02) {
                cond2 = false;
                break;
            }
    }

    // condition (3): F(j+1)(gamma_i) outside B_rho, fresh samples at 2x density
    bool cond3 = true;
    const double contraction = std::pow(0.5, s);
    for (const auto& c : prob.curves)
        for (const C2Point& y : c.sample(2 * o.curve_samples))
            if (contraction * norm(push.phi.apply(y)) <= rho * 0.98) {
                cond3 = false;
                break;
            }

    StepReport rep;
    rep.j = r;
    rep.s = s;
    rep.R = R;
    rep.pusher_degree = push.report.degree;
    rep.supK_err = push.report.supK;
    rep.min_curve_norm = push.report.min_curve_norm;
    rep.stage = push.report.stage;
    rep.cond1 = cond1;
    rep.cond2 = cond2;
    rep.cond3 = cond3;
    if (!cond1 || !cond2 || !cond3)
        throw StepFailure("induction_step: condition check failed (cond1=" +
                          std::to_string(cond1) + " cond2=" + std::to_string(cond2) +
                          " cond3=" + std::to_string(cond3) + " at step " + std::to_string(r) +
                          ", pusher stage " + push.report.stage + ")");
    next.reports.push_back(rep);
    return next;
}

// ---------------------------------------------------------------------------
// Membership probing
// ---------------------------------------------------------------------------

struct ProbeResult {
    ProbeVerdict verdict = ProbeVerdict::Undetermined;
    int iterations = 0;
    double final_norm = 0.0;
    int entry_step = -1;
};

namespace detail {

/// Entry/contraction bookkeeping shared by the probe variants. feed() returns
/// true once the verdict is decided.
struct ProbeLogic {
    double rho;
    double escape;
    ProbeResult res;
    int entry = -1;
    double entry_norm = 0.0;
    int decreases_left = 0;

    bool feed(int t, double n) {
        res.iterations = t;
        res.final_norm = n;
        if (!(n <= escape)) {  // escape radius crossed or numeric overflow
            res.verdict = ProbeVerdict::Outside;
            return true;
        }
        if (entry >= 0) {
            if (n < entry_norm || n < 1e-15) {
                entry_norm = n;
                if (--decreases_left == 0) {
                    res.verdict = ProbeVerdict::Inside;
                    res.entry_step = entry;
                    return true;
                }
            } else {
                entry = -1;  // contraction broke; keep scanning
            }
        }
        if (entry < 0 && n < rho) {
            entry = t;
            entry_norm = n;
            decreases_left = 3;
        }
        return false;
    }
};

}  // namespace detail

/// Probe against an explicit stage sequence, extended by A past its end.
inline ProbeResult basin_probe(const C2Point& x0, const std::vector<Auto>& stages,
                               const ContractionParams& params, int budget, double escape) {
    if (escape <= params.rho) throw PreconditionError("basin_probe: escape must exceed rho");
    detail::ProbeLogic logic{params.rho, escape, {}, -1, 0.0, 0};
    logic.res.final_norm = norm(x0);
    if (budget <= 0) return logic.res;
    if (logic.feed(0, norm(x0))) return logic.res;
    C2Point cur = x0;
    for (int t = 1; t <= budget; ++t) {
        cur = t <= static_cast<int>(stages.size()) ? stages[t - 1].apply(cur) : 0.5 * cur;
        if (logic.feed(t, norm(cur))) return logic.res;
    }
    return logic.res;
}

/// Probe against the induction state's stage timeline: F_1 = A, then per step
/// the factor A o psi_k followed by s_k - 1 repeats of A, then extension by A.
inline ProbeResult basin_probe(const C2Point& x0, const InductionState& st, int budget,
                               double escape) {
    if (escape <= st.params.rho)
        throw PreconditionError("basin_probe: escape must exceed rho");
    detail::ProbeLogic logic{st.params.rho, escape, {}, -1, 0.0, 0};
    logic.res.final_norm = norm(x0);
    if (budget <= 0) return logic.res;
    if (logic.feed(0, norm(x0))) return logic.res;

    int t = 1;
    C2Point v = 0.5 * x0;  // after F_1 = A
    if (logic.feed(t, norm(v))) return logic.res;
    for (std::size_t k = 0; k < st.pushers.size() && t < budget; ++k) {
        v = 0.5 * st.pushers[k].apply(v);
        if (logic.feed(++t, norm(v))) return logic.res;
        for (int i = 1; i < st.s_values[k] && t < budget; ++i) {
            v = 0.5 * v;
            if (logic.feed(++t, norm(v))) return logic.res;
        }
    }
    while (t < budget) {  // extension by A
        v = 0.5 * v;
        if (logic.feed(++t, norm(v))) return logic.res;
    }
    return logic.res;
}

// ---------------------------------------------------------------------------
// Slice rendering
// ---------------------------------------------------------------------------

struct SliceSpec {
    bool graph = false;  // probe (zeta, f(zeta)) instead of the affine plane
    C2Point base{};
    C2Point dir_u{{1.0, 0.0}, {0.0, 0.0}};
    C2Point dir_v{{0.0, 1.0}, {0.0, 0.0}};
    double u_min = -3.0, u_max = 3.0;
    double v_min = -3.0, v_max = 3.0;
    int res_u = 256, res_v = 256;
    int budget = 0;  // 0: total stages + 3
    double escape = 1e6;
};

struct SliceCounts {
    long inside = 0;
    long outside = 0;
    long undetermined = 0;
};

struct SliceRender {
    RasterImage image;
    SliceCounts counts;
};

inline SliceRender render_slice(const SliceSpec& spec, const InductionState& st,
                                int threads = 1) {
    if (spec.res_u < 16 || spec.res_v < 16)
        throw PreconditionError("render_slice: resolution must be >= 16");
    if (spec.escape <= st.params.rho)
        throw PreconditionError("render_slice: escape radius must exceed rho");
    const int budget = spec.budget > 0 ? spec.budget : st.total_stages() + 3;

    SliceRender out;
    out.image.width = spec.res_u;
    out.image.height = spec.res_v;
    out.image.pixels.assign(static_cast<std::size_t>(spec.res_u) * spec.res_v,
                            ProbeVerdict::Undetermined);

    auto probe_pixel = [&](int row, int col) {
        // pixel-centered lattice: no sample lies exactly on an axis-aligned
        // boundary feature such as the half-line
        const double u = spec.u_min + (col + 0.5) * (spec.u_max - spec.u_min) / spec.res_u;
        const double v = spec.v_max - (row + 0.5) * (spec.v_max - spec.v_min) / spec.res_v;
        C2Point x;
        if (spec.graph) {
            const Complex zeta(u, v);
            if (st.surf.f.dist_to_nearest_pole(zeta) < 1e-12)
                return ProbeVerdict::Undetermined;
            x = omega(zeta, st.surf);
        } else {
            x = spec.base + u * spec.dir_u + v * spec.dir_v;
        }
        return basin_probe(x, st, budget, spec.escape).verdict;
    };

    auto run_rows = [&](int row_begin, int row_end) {
        for (int row = row_begin; row < row_end; ++row)
            for (int col = 0; col < spec.res_u; ++col)
                out.image.at(row, col) = probe_pixel(row, col);
    };

    const int n_threads = std::max(1, threads);
    if (n_threads == 1) {
        run_rows(0, spec.res_v);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (spec.res_v + n_threads - 1) / n_threads;
        for (int k = 0; k < n_threads; ++k) {
            const int lo = k * chunk;
            const int hi = std::min(spec.res_v, lo + chunk);
            if (lo < hi) pool.emplace_back(run_rows, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    for (ProbeVerdict p : out.image.pixels) {
        if (p == ProbeVerdict::Inside) ++out.counts.inside;
        else if (p == ProbeVerdict::Outside) ++out.counts.outside;
        else ++out.counts.undetermined;
    }
    return out;
}

/// CSV with one row per accepted step.
inline CsvTable step_report_table(const InductionState& st) {
    CsvTable t;
    t.header = {"j",       "s",        "R",     "pusher_degree", "supK_err",
                "min_curve_norm", "cond1", "cond2",         "cond3"};
    for (const StepReport& r : st.reports)
        t.add_row({std::to_string(r.j), std::to_string(r.s), csv_num(r.R),
                   std::to_string(r.pusher_degree), csv_num(r.supK_err),
                   csv_num(r.min_curve_norm), r.cond1 ? "1" : "0", r.cond2 ? "1" : "0",
                   r.cond3 ? "1" : "0"});
    return t;
}

}  // namespace fbembed
