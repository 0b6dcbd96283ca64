#include <catch2/catch_amalgamated.hpp>

#include "fbembed/classify.hpp"
#include "fbembed/conformal.hpp"

using namespace fbembed;
using Catch::Approx;

TEST_CASE("mu point values") {
    CHECK(std::abs(mu(Complex{0.0, 0.0}) - Complex{0.0, 0.0}) < 1e-15);
    CHECK(std::abs(mu(Complex{0.5, 0.0}) - Complex{8.0, 0.0}) < 1e-12);
    CHECK(std::abs(mu(Complex{0.0, 1.0}) - Complex{-2.0, 0.0}) < 1e-12);
    CHECK_THROWS_AS(mu(Complex{1.0, 0.0}), PoleError);
    for (int j = 10; j <= 14; ++j)
        CHECK(std::abs(mu(Complex{1.0 - std::pow(2.0, -j), 0.0})) > 1e6);
}

TEST_CASE("mu maps the disc off L and the boundary onto L") {
    auto inside = disc_samples({0.0, 0.0}, 1.0, 10000);
    for (const Complex& z : inside) CHECK(dist_to_half_line(mu(z)) > 0.0);
    for (const Complex& z : circle_samples({0.0, 0.0}, 1.0, 1000)) {
        if (std::abs(z - 1.0) < 1e-2) continue;  // |mu| ~ 4e4 there; fp noise exceeds 1e-9
        CHECK(dist_to_half_line(mu(z)) < 1e-9);
    }
}

TEST_CASE("mu surjectivity probes") {
    int done = 0;
    for (std::size_t i = 1; done < 100; ++i) {
        const auto h = halton_point<2>(i);
        const Complex target(8.0 * h[0] - 4.0, 8.0 * h[1] - 4.0);
        if (dist_to_half_line(target) < 1e-3) continue;
        const Complex zeta = mu_preimage(target);
        CHECK(std::abs(zeta) < 1.0);
        CHECK(std::abs(mu(zeta) - target) < 1e-10);
        ++done;
    }
}

TEST_CASE("mobius pole shift") {
    CHECK(std::abs(mobius_pole_shift(Complex{2.0, 0.0}, Complex{0.0, 0.0}) -
                   Complex{0.5, 0.0}) < 1e-15);
    const Complex p{0.3, -0.7};
    for (int j = 1; j <= 20; ++j)
        CHECK(std::abs(mobius_pole_shift(p + std::pow(2.0, -j), p) - std::pow(2.0, j)) <
              1e-6 * std::pow(2.0, j));
    CHECK_THROWS_AS(mobius_pole_shift(p, p), PoleError);
    const CPoint img = mobius_pole_shift(CPoint::infinity(), CPoint(Complex{0.0, 0.0}));
    CHECK_FALSE(img.infinite);
    CHECK(std::abs(img.value) < 1e-15);
}

TEST_CASE("riemann map: disc fixtures are exact") {
    auto punct = PunctureSet::from_rule(
        [](int j) { return Complex(1.0 - std::pow(2.0, -j), 0.0); }, 12);
    auto fit = riemann_map_fit(SimplyConnectedRegion::disc({0.0, 0.0}, 1.0), punct);
    CHECK(fit.residual == 0.0);
    for (const Complex& z : disc_samples({0.0, 0.0}, 0.9, 50))
        CHECK(std::abs(fit.map(z) - z) < 1e-14);

    auto punct3 = PunctureSet::from_rule(
        [](int j) { return Complex(4.0 - std::pow(2.0, -j), 0.0); }, 12);
    auto shifted = riemann_map_fit(SimplyConnectedRegion::disc({3.0, 0.0}, 1.0), punct3);
    for (const Complex& z : disc_samples({3.0, 0.0}, 0.9, 50))
        CHECK(std::abs(shifted.map(z) - (z - 3.0)) < 1e-14);
    const auto& imgs = shifted.puncture_images;
    REQUIRE(imgs.size() >= 5);
    for (std::size_t i = imgs.size() - 5; i + 1 < imgs.size(); ++i)
        CHECK(std::abs(imgs[i + 1] - 1.0) < std::abs(imgs[i] - 1.0));
}

TEST_CASE("riemann map: half-plane closed form") {
    // U = {Re z < 0}, punctures marching to the boundary point 0
    auto punct = PunctureSet::from_rule(
        [](int j) { return Complex(-std::pow(2.0, -j), 0.0); }, 12);
    auto fit = riemann_map_fit(
        SimplyConnectedRegion::half_plane({0.0, 0.0}, {1.0, 0.0}), punct);
    for (const Complex& z :
         {Complex{-1.0, 0.0}, Complex{-0.5, 0.5}, Complex{-3.0, -2.0}})
        CHECK(std::abs(fit.map(z)) < 1.0);
    const auto& imgs = fit.puncture_images;
    for (std::size_t i = imgs.size() - 5; i + 1 < imgs.size(); ++i)
        CHECK(std::abs(imgs[i + 1] - 1.0) < std::abs(imgs[i] - 1.0));
}

TEST_CASE("riemann map: ellipse numeric fit") {
    auto punct = PunctureSet::from_rule(
        [](int j) { return Complex(1.0 - std::pow(2.0, -j), 0.0); }, 12);
    auto region = SimplyConnectedRegion::ellipse({0.0, 0.0}, 1.0, 0.6);
    auto fit = riemann_map_fit(region, punct);
    CHECK(fit.residual < 1e-6);
    // boundary correspondence on a fresh boundary set
    for (int k = 0; k < 257; ++k) {
        const double t = 2.0 * M_PI * (k + 0.37) / 257.0;
        const Complex z(std::cos(t), 0.6 * std::sin(t));
        CHECK(std::abs(std::abs(fit.map(z)) - 1.0) < 5e-6);
    }
    // holomorphy probe: finite-difference Cauchy-Riemann residual inside
    for (const Complex& z : disc_samples({0.0, 0.0}, 0.4, 25)) {
        const double h = 1e-6;
        const Complex dx = (fit.map(z + h) - fit.map(z - h)) / (2.0 * h);
        const Complex dy =
            (fit.map(z + Complex(0.0, h)) - fit.map(z - Complex(0.0, h))) / (2.0 * h);
        CHECK(std::abs(dx - dy / Complex(0.0, 1.0)) < 1e-6);
    }
    const auto& imgs = fit.puncture_images;
    for (std::size_t i = imgs.size() - 5; i + 1 < imgs.size(); ++i)
        CHECK(std::abs(imgs[i + 1] - 1.0) < std::abs(imgs[i] - 1.0) + 1e-12);
}

TEST_CASE("slit map: disc recovers 1/z + z") {
    std::vector<ComplementComponent> comps{ComplementComponent::disc({0.0, 0.0}, 1.0, false)};
    auto spec = hilbert_slit_map_fit(comps, CPoint(Complex{0.0, 0.0}), 0.0);
    for (const Complex& z : disc_samples({0.0, 0.0}, 0.95, 200)) {
        if (std::abs(z) < 0.2) continue;
        CHECK(std::abs(spec(z) - (1.0 / z + z)) < 1e-8);
    }
    CHECK(std::abs(spec.alpha1 - 1.0) < 1e-6);
    for (const Complex& z : circle_samples({0.0, 0.0}, 1.0, 64)) {
        const Complex img = spec(z);
        CHECK(std::abs(img.imag()) < 1e-8);
        CHECK(img.real() > -2.0 - 1e-8);
        CHECK(img.real() < 2.0 + 1e-8);
    }
}

TEST_CASE("slit map: disc exterior recovers z + 1/z") {
    std::vector<ComplementComponent> comps{ComplementComponent::disc({0.0, 0.0}, 1.0, true)};
    auto spec = hilbert_slit_map_fit(comps, CPoint::infinity(), 0.0);
    for (const Complex& z : circle_samples({0.0, 0.0}, 1.7, 200))
        CHECK(std::abs(spec(z) - (z + 1.0 / z)) < 1e-8);
    CHECK(std::abs(spec.alpha1 - 1.0) < 1e-6);
}

TEST_CASE("slit map: annulus collinearity and degree monotonicity") {
    std::vector<ComplementComponent> comps{ComplementComponent::disc({0.0, 0.0}, 0.5, true),
                                           ComplementComponent::disc({0.0, 0.0}, 1.0, false)};
    SlitFitBudget coarse;
    coarse.degree = 32;
    coarse.tolerance = 1.0;  // collect residual without throwing
    auto lo = hilbert_slit_map_fit(comps, CPoint(Complex{0.75, 0.0}), 0.0, coarse);
    auto hi_budget = coarse;
    hi_budget.degree = 64;
    auto hi = hilbert_slit_map_fit(comps, CPoint(Complex{0.75, 0.0}), 0.0, hi_budget);
    CHECK(hi.residual < 1e-6);
    CHECK(hi.residual <= lo.residual + 1e-12);
    REQUIRE(hi.cut_lengths.size() == 2);
    for (bool flag : hi.degenerate_cut_flags) CHECK_FALSE(flag);
}

TEST_CASE("map handle chains and injectivity probe") {
    MapHandle chain = MapHandle::chain(
        {MapHandle(MobiusMap::translation({1.0, 0.0})), MapHandle::mu_map()});
    CHECK(std::abs(chain(Complex{-1.0, 0.0}) - Complex{0.0, 0.0}) < 1e-15);
    auto probe = disc_samples({-0.5, 0.0}, 0.4, 60);
    CHECK(injectivity_probe_gap(chain, probe) > 0.0);
}

TEST_CASE("classification: plane with punctures marching to infinity") {
    DomainSpec spec;
    spec.limit = CPoint::infinity();
    spec.punctures =
        PunctureSet::from_rule([](int j) { return Complex(static_cast<double>(j), 0.0); }, 30);
    auto res = classify_to_standard(spec);
    CHECK(res.case_id == 1);
    CHECK(res.audit.empty());
    CHECK_FALSE(res.domain.has_half_line);
    CHECK(res.domain.slits.empty());
    const auto pts = res.domain.punctures.points();
    REQUIRE(pts.size() == 30);
    for (int j = 1; j <= 30; ++j)
        CHECK(std::abs(pts[static_cast<std::size_t>(j - 1)] - static_cast<double>(j)) < 1e-12);
}

TEST_CASE("classification: punctured plane with limit at the puncture") {
    DomainSpec spec;
    spec.components.push_back(ComplementComponent::point({0.0, 0.0}));
    spec.limit = CPoint(Complex{0.0, 0.0});
    spec.punctures =
        PunctureSet::from_rule([](int j) { return Complex(std::pow(2.0, -j), 0.0); }, 24);
    auto res = classify_to_standard(spec);
    CHECK(res.case_id == 2);
    REQUIRE(res.audit.size() == 1);
    CHECK(res.audit[0] == "pole_shift");
    CHECK_FALSE(res.domain.has_half_line);
    const auto pts = res.domain.punctures.points();
    REQUIRE(pts.size() == 24);
    for (int j = 1; j <= 24; ++j)
        CHECK(std::abs(pts[static_cast<std::size_t>(j - 1)] - std::pow(2.0, j)) <
              1e-9 * std::pow(2.0, j));
}

TEST_CASE("classification: disc with punctures accumulating on the circle") {
    DomainSpec spec;
    spec.components.push_back(ComplementComponent::disc({0.0, 0.0}, 1.0, false));
    spec.limit = CPoint(Complex{1.0, 0.0});
    spec.punctures =
        PunctureSet::from_rule([](int j) { return Complex(1.0 - std::pow(2.0, -j), 0.0); }, 16);
    spec.witness = PlanarCurve::segment({0.0, 0.0}, {1.0, 0.0});
    spec.has_witness = true;
    auto res = classify_to_standard(spec);
    CHECK(res.case_id == 6);
    REQUIRE_FALSE(res.audit.empty());
    CHECK(res.audit.back() == "mu");
    CHECK(res.domain.has_half_line);
    const auto pts = res.domain.punctures.points();
    REQUIRE(pts.size() == 16);
    for (int j = 1; j <= 16; ++j)
        CHECK(std::abs(pts[static_cast<std::size_t>(j - 1)] -
                       mu(Complex(1.0 - std::pow(2.0, -j), 0.0))) <
              1e-6 * std::abs(mu(Complex(1.0 - std::pow(2.0, -j), 0.0))));
    // output punctures are discrete: no pair closer than 1e-6 in a test window
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            CHECK(std::abs(pts[i] - pts[j]) > 1e-6);
}

TEST_CASE("classification: slit stage for a plane minus a disc, limit at infinity") {
    DomainSpec spec;
    spec.components.push_back(ComplementComponent::disc({0.0, 0.0}, 1.0, true));
    spec.limit = CPoint::infinity();
    spec.punctures =
        PunctureSet::from_rule([](int j) { return Complex(0.0, 3.0 + j); }, 10);
    auto res = classify_to_standard(spec);
    CHECK(res.case_id == 1);
    REQUIRE(res.audit.size() == 1);
    CHECK(res.audit[0] == "slit_map");
    REQUIRE(res.domain.slits.size() == 1);
    // the canonical cut for the unit disc at infinity is [-2, 2]
    CHECK(std::abs(res.domain.slits[0].seg_a - Complex(-2.0, 0.0)) < 1e-6);
    CHECK(std::abs(res.domain.slits[0].seg_b - Complex(2.0, 0.0)) < 1e-6);
}
