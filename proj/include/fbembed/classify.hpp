#pragma once

#include <string>
#include <vector>

#include "fbembed/complex_plane.hpp"
#include "fbembed/conformal.hpp"

// Reduction of an n-connected domain with a regular puncture sequence to a
// standard domain: dispatch on (components bounded?, location of the limit
// point) with pole shifts, canonical slit maps, Riemann maps and mu composed
// into a single audited chain.

namespace fbembed {

struct ClassifyResult {
    StandardDomain domain;
    MapHandle chain;
    std::vector<std::string> audit;  // stage names in application order
    int case_id = 0;
};

namespace detail {

inline std::pair<Complex, double> circumcircle(Complex a, Complex b, Complex c) {
    const Complex u = b - a, v = c - a;
    const double cross = u.real() * v.imag() - u.imag() * v.real();
    if (std::abs(cross) < 1e-14 * (std::abs(u) + std::abs(v)) * std::max(std::abs(u), std::abs(v)))
        throw PrecisionError("circumcircle: collinear boundary images");
    const double u2 = std::norm(u), v2 = std::norm(v);
    const Complex center =
        a + Complex(v.imag() * u2 - u.imag() * v2, u.real() * v2 - v.real() * u2) / (2.0 * cross);
    return {center, std::abs(a - center)};
}

inline double halfplane_side(Complex z, const ComplementComponent& k) {
    const Complex nrm = k.direction / std::abs(k.direction);
    return (z - k.center).real() * nrm.real() + (z - k.center).imag() * nrm.imag();
}

/// Three boundary points of a circular/line boundary, all at distance > tol
/// from the pole.
inline std::vector<Complex> boundary_triple(const ComplementComponent& k, Complex pole,
                                            double tol) {
    std::vector<Complex> out;
    if (k.shape == ComponentShape::Disc) {
        for (int base = 0; base < 12 && out.size() < 3; ++base) {
            const Complex z = k.center + k.radius * std::polar(1.0, 2.0 * M_PI * base / 12.0);
            if (std::abs(z - pole) > tol) out.push_back(z);
        }
    } else {  // HalfPlane
        const Complex nrm = k.direction / std::abs(k.direction);
        const Complex tan = Complex(0.0, 1.0) * nrm;
        const double scale = std::max(1.0, 2.0 * std::abs(pole - k.center));
        for (int i = -3; i <= 3 && out.size() < 3; ++i) {
            const Complex z = k.center + scale * static_cast<double>(i) * tan;
            if (std::abs(z - pole) > tol) out.push_back(z);
        }
    }
    if (out.size() < 3) throw PrecisionError("boundary_triple: could not avoid the pole");
    return out;
}

/// A point interior to K, bounded away from the pole.
inline Complex interior_point(const ComplementComponent& k, Complex pole, double tol) {
    if (k.shape == ComponentShape::Disc) {
        if (k.bounded) {
            if (std::abs(k.center - pole) > tol) return k.center;
            return k.center + Complex(0.5 * k.radius, 0.0);
        }
        Complex u = k.center - pole;
        if (std::abs(u) < tol) u = Complex(1.0, 0.0);
        return k.center + 3.0 * k.radius * u / std::abs(u);
    }
    const Complex nrm = k.direction / std::abs(k.direction);
    for (double s = 1.0; s < 64.0; s *= 2.0) {
        const Complex q = k.center + s * std::max(1.0, std::abs(pole - k.center)) * nrm;
        if (std::abs(q - pole) > tol) return q;
    }
    throw PrecisionError("interior_point: could not avoid the pole");
}

/// Exact image of a disc/point/half-plane component under zeta -> 1/(zeta-p).
/// The pole must not lie in the component's interior-avoidance tolerance of
/// the chosen probe points; a pole on the boundary yields a half-plane.
inline ComplementComponent shift_component(Complex pole, const ComplementComponent& k,
                                           double tol = 1e-9) {
    const MobiusMap m = MobiusMap::pole_shift(pole);
    if (k.shape == ComponentShape::Point) {
        if (std::abs(k.center - pole) <= tol)
            throw PreconditionError("shift_component: pole at the point component");
        return ComplementComponent::point(m.apply(CPoint(k.center)).value);
    }
    if (k.shape != ComponentShape::Disc && k.shape != ComponentShape::HalfPlane)
        throw ClassificationUnsupported("shift_component: unsupported component shape");

    const bool pole_on_boundary =
        (k.shape == ComponentShape::Disc)
            ? std::abs(std::abs(pole - k.center) - k.radius) <= tol
            : std::abs(halfplane_side(pole, k)) <= tol;

    const auto triple = boundary_triple(k, pole, tol);
    const Complex q_img = m.apply(CPoint(interior_point(k, pole, tol))).value;

    if (pole_on_boundary) {
        // circle/line through the pole maps to a line; keep the side of q_img
        const Complex a = m.apply(CPoint(triple[0])).value;
        const Complex b = m.apply(CPoint(triple[1])).value;
        Complex nrm = Complex(0.0, 1.0) * (b - a) / std::abs(b - a);
        if ((q_img - a).real() * nrm.real() + (q_img - a).imag() * nrm.imag() < 0.0) nrm = -nrm;
        return ComplementComponent::half_plane(a, nrm);
    }

    const Complex a = m.apply(CPoint(triple[0])).value;
    const Complex b = m.apply(CPoint(triple[1])).value;
    const Complex c = m.apply(CPoint(triple[2])).value;
    const auto [center, radius] = circumcircle(a, b, c);
    const bool inside = std::abs(q_img - center) <= radius;
    return ComplementComponent::disc(center, radius, inside);
}

inline PlanarCurve cut_segment(const SlitMapSpec& spec, const SlitBasisBlock& blk,
                               double theta) {
    const Complex rot = std::polar(1.0, -theta);
    const int n = 1024;
    std::vector<double> re(static_cast<std::size_t>(n));
    double mean = 0.0;
    int imax = 0, imin = 0;
    for (int k = 0; k < n; ++k) {
        const Complex z = blk.center + blk.radius * std::polar(1.0, 2.0 * M_PI * k / n);
        const Complex img = rot * spec(z);
        re[static_cast<std::size_t>(k)] = img.real();
        mean += img.imag();
        if (img.real() > re[static_cast<std::size_t>(imax)]) imax = k;
        if (img.real() < re[static_cast<std::size_t>(imin)]) imin = k;
    }
    mean /= static_cast<double>(n);
    // parabolic refinement of the sampled extrema (endpoint error drops from
    // O(dtheta^2) to roundoff level)
    auto refine = [&](int i) {
        const double f0 = re[static_cast<std::size_t>((i + n - 1) % n)];
        const double f1 = re[static_cast<std::size_t>(i)];
        const double f2 = re[static_cast<std::size_t>((i + 1) % n)];
        const double den = f0 - 2.0 * f1 + f2;
        double off = 0.0;
        if (std::abs(den) > 1e-300) off = std::clamp(0.5 * (f0 - f2) / den, -1.0, 1.0);
        const double th = 2.0 * M_PI * (static_cast<double>(i) + off) / n;
        return (rot * spec(blk.center + blk.radius * std::polar(1.0, th))).real();
    };
    const double lo = refine(imin), hi = refine(imax);
    const Complex back = std::polar(1.0, theta);
    return PlanarCurve::segment(back * Complex(lo, mean), back * Complex(hi, mean));
}

}  // namespace detail

/// Proposition-style reduction: returns the standard domain, the realizing
/// chain, and a per-stage audit. Throws ClassificationUnsupported when the
/// numeric slit/Riemann stages cannot handle the geometry.
inline ClassifyResult classify_to_standard(const DomainSpec& spec) {
    validate_domain_spec(spec);
    constexpr double tol = 1e-9;

    for (const auto& k : spec.components)
        if (k.shape != ComponentShape::Disc && k.shape != ComponentShape::Point &&
            k.shape != ComponentShape::HalfPlane)
            throw ClassificationUnsupported(
                "classify_to_standard: only disc/point/half-plane components supported");

    std::vector<ComplementComponent> comps = spec.components;
    CPoint p = spec.limit;
    std::vector<MapHandle> stages;
    std::vector<std::string> audit;
    ClassifyResult out;

    auto apply_shift = [&](Complex pole, bool drop_point_at_pole) {
        std::vector<ComplementComponent> next;
        for (const auto& k : comps) {
            if (drop_point_at_pole && k.shape == ComponentShape::Point &&
                std::abs(k.center - pole) <= tol)
                continue;
            next.push_back(detail::shift_component(pole, k, tol));
        }
        comps = std::move(next);
        stages.push_back(MapHandle(MobiusMap::pole_shift(pole)));
        audit.push_back("pole_shift");
        p = CPoint::infinity();
    };

    auto finish = [&](StandardDomain domain) {
        out.chain = stages.empty() ? MapHandle::identity() : MapHandle::chain(stages);
        out.domain = std::move(domain);
        out.audit = audit;
        // puncture sequence through the full chain
        const MapHandle chain = out.chain;
        const auto rule = spec.punctures.rule;
        const int n = spec.punctures.truncation;
        PunctureSet seq =
            n > 0 ? PunctureSet::from_rule([chain, rule](int j) { return chain(rule(j)); }, n,
                                           spec.punctures.description)
                  : PunctureSet::none();
        if (out.domain.punctures.empty()) {
            out.domain.punctures = std::move(seq);
        } else if (!seq.empty()) {
            // prepend isolated punctures contributed by point components
            const PunctureSet extra = out.domain.punctures;
            const int ne = extra.truncation;
            out.domain.punctures = PunctureSet::from_rule(
                [extra, seq](int j) {
                    return j <= extra.truncation ? extra.rule(j)
                                                 : seq.rule(j - extra.truncation);
                },
                ne + n, spec.punctures.description);
        }
        return out;
    };

    for (int depth = 0; depth < 6; ++depth) {
        std::vector<std::size_t> unbounded;
        for (std::size_t i = 0; i < comps.size(); ++i)
            if (!comps[i].bounded) unbounded.push_back(i);

        if (unbounded.size() > 1) {
            // make all but one component bounded first
            for (std::size_t i : unbounded) {
                const Complex q = detail::interior_point(comps[i], Complex{1e18, 1e18}, tol);
                if (!p.infinite && std::abs(q - p.value) <= tol) continue;
                apply_shift(q, false);
                break;
            }
            continue;
        }

        if (unbounded.size() == 1) {
            const std::size_t ui = unbounded.front();
            if (!p.infinite) {
                // point component at p: drop it and invert (case with K unbounded, p = K_k)
                bool handled = false;
                for (const auto& k : comps)
                    if (k.shape == ComponentShape::Point && std::abs(k.center - p.value) <= tol) {
                        out.case_id = out.case_id ? out.case_id : 5;
                        apply_shift(k.center, true);
                        handled = true;
                        break;
                    }
                if (handled) continue;

                // p on some component boundary (case with K unbounded, p in K_k)
                const ComplementComponent& ku = comps[ui];
                if (comps.size() == 1 && ku.shape == ComponentShape::Disc &&
                    std::abs(std::abs(p.value - ku.center) - ku.radius) <= tol) {
                    // U is a round disc with p on its circle: affine normalization,
                    // rotation carrying p to 1, then mu
                    out.case_id = out.case_id ? out.case_id : 6;
                    const MobiusMap affine{Complex(1.0 / ku.radius),
                                           -ku.center / ku.radius, 0.0, 1.0};
                    if (!(affine.a == Complex(1.0) && affine.b == Complex{})) {
                        stages.push_back(MapHandle(affine));
                        audit.push_back("affine_normalize");
                    }
                    const Complex ph = affine.apply(p).value;
                    const Complex rot = std::conj(ph) / std::abs(ph);
                    if (std::abs(rot - 1.0) > tol) {
                        stages.push_back(MapHandle(MobiusMap::rotation(rot)));
                        audit.push_back("rotation");
                    }
                    stages.push_back(MapHandle::mu_map());
                    audit.push_back("mu");
                    return finish(StandardDomain::plane_minus_L());
                }
                bool on_boundary = false;
                for (const auto& k : comps)
                    if (dist_to_component(p.value, k) <= tol) on_boundary = true;
                if (!on_boundary)
                    throw StructuralError(
                        "classify_to_standard: limit point not on the domain boundary");
                out.case_id = out.case_id ? out.case_id : 6;
                apply_shift(p.value, false);
                continue;
            }

            // p = infinity with one unbounded component
            out.case_id = out.case_id ? out.case_id : 4;
            const ComplementComponent& ku = comps[ui];
            if (comps.size() > 1)
                throw ClassificationUnsupported(
                    "classify_to_standard: unbounded-limit case with additional bounded "
                    "components is outside the numeric scope");
            SimplyConnectedRegion region =
                ku.shape == ComponentShape::HalfPlane
                    ? SimplyConnectedRegion::half_plane(ku.center, ku.direction)
                    : SimplyConnectedRegion::disc(ku.center, ku.radius);
            if (ku.shape == ComponentShape::Disc && ku.bounded)
                throw StructuralError("classify_to_standard: inconsistent boundedness");
            // fit against the punctures as already transformed by the chain so far
            const MapHandle sofar =
                stages.empty() ? MapHandle::identity() : MapHandle::chain(stages);
            const auto rule = spec.punctures.rule;
            PunctureSet mapped = PunctureSet::from_rule(
                [sofar, rule](int j) { return sofar(rule(j)); }, spec.punctures.truncation);
            RiemannFit fit = riemann_map_fit(region, mapped);
            stages.push_back(fit.map);
            audit.push_back("riemann_map");
            stages.push_back(MapHandle::mu_map());
            audit.push_back("mu");
            return finish(StandardDomain::plane_minus_L());
        }

        // all components bounded
        if (!p.infinite) {
            // limit is a point component: canonical map normalized at p covers
            // the pole shift and any remaining cuts in one stage
            const ComplementComponent* point_at_p = nullptr;
            for (const auto& k : comps)
                if (k.shape == ComponentShape::Point && std::abs(k.center - p.value) <= tol)
                    point_at_p = &k;
            if (point_at_p) {
                out.case_id = out.case_id ? out.case_id : 2;
                std::vector<ComplementComponent> rest;
                for (const auto& k : comps)
                    if (&k != point_at_p) rest.push_back(k);
                StandardDomain domain;
                if (rest.empty()) {
                    stages.push_back(MapHandle(MobiusMap::pole_shift(p.value)));
                    audit.push_back("pole_shift");
                } else {
                    SlitMapSpec slit = hilbert_slit_map_fit(rest, p, 0.0);
                    std::vector<Complex> extra;
                    for (const auto& blk : slit.blocks) {
                        if (blk.radius > 0.0) {
                            domain.slits.push_back(detail::cut_segment(slit, blk, 0.0));
                        } else {
                            extra.push_back(slit(blk.center));
                        }
                    }
                    if (!extra.empty()) domain.punctures = PunctureSet::from_list(extra);
                    stages.push_back(MapHandle(std::move(slit)));
                    audit.push_back("slit_map");
                }
                return finish(std::move(domain));
            }
            // p on the boundary of a bounded disc: invert at p and recurse
            bool on_boundary = false;
            for (const auto& k : comps)
                if (dist_to_component(p.value, k) <= tol) on_boundary = true;
            if (!on_boundary)
                throw StructuralError(
                    "classify_to_standard: limit point not on the domain boundary");
            out.case_id = out.case_id ? out.case_id : 3;
            if (comps.size() > 1)
                throw ClassificationUnsupported(
                    "classify_to_standard: bounded-disc limit case with additional "
                    "components is outside the numeric scope");
            apply_shift(p.value, false);
            continue;
        }

        // p = infinity, all components bounded
        out.case_id = out.case_id ? out.case_id : 1;
        StandardDomain domain;
        bool any_circle = false;
        for (const auto& k : comps)
            if (k.shape == ComponentShape::Disc) any_circle = true;
        if (comps.empty()) {
            return finish(std::move(domain));
        }
        if (!any_circle) {
            // only point components: they become isolated punctures unchanged
            std::vector<Complex> extra;
            for (const auto& k : comps) extra.push_back(k.center);
            domain.punctures = PunctureSet::from_list(extra);
            return finish(std::move(domain));
        }
        SlitMapSpec slit = hilbert_slit_map_fit(comps, CPoint::infinity(), 0.0);
        std::vector<Complex> extra;
        for (const auto& blk : slit.blocks) {
            if (blk.radius > 0.0) {
                domain.slits.push_back(detail::cut_segment(slit, blk, 0.0));
            } else {
                extra.push_back(slit(blk.center));
            }
        }
        if (!extra.empty()) domain.punctures = PunctureSet::from_list(extra);
        stages.push_back(MapHandle(std::move(slit)));
        audit.push_back("slit_map");
        return finish(std::move(domain));
    }
    throw ClassificationUnsupported("classify_to_standard: reduction did not terminate");
}

}  // namespace fbembed
