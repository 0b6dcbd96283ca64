#include <catch2/catch_amalgamated.hpp>

#include "fbembed/autos.hpp"
#include "fbembed/embedding.hpp"

using namespace fbembed;
using Catch::Approx;

namespace {

MapHandle poly_map(std::vector<Complex> coeffs) {
    // coeffs c_1 z + c_2 z^2 + ... as a series map handle
    auto pts = disc_samples({0.0, 0.0}, 3.0, 120);
    std::vector<Complex> targets;  // targets for the cofactor h with p = z h
    targets.reserve(pts.size());
    for (const Complex& z : pts) {
        Complex v{};
        Complex pw = 1.0;
        for (const Complex& c : coeffs) {
            v += c * pw;
            pw *= z;
        }
        targets.push_back(v);
    }
    SeriesMap s;
    s.center = Complex{0.0, 0.0};
    s.factor = PolyFit::fit(pts, targets, static_cast<int>(coeffs.size()));
    return MapHandle(std::move(s));
}

MapHandle zero_map() { return poly_map({{0.0, 0.0}}); }

}  // namespace

TEST_CASE("choose_coefficients on the bare half-line domain") {
    auto f = choose_coefficients(StandardDomain::plane_minus_L(), 32);
    CHECK(f.empty());
    CHECK(f.strip_halfwidth == 0.0);
    CHECK(std::abs(f(Complex{5.0, 0.0})) == 0.0);
}

TEST_CASE("choose_coefficients puncture rule") {
    StandardDomain s = StandardDomain::plane_minus_L();
    s.punctures = PunctureSet::from_list({{1.0, 0.0}});  // dist to L is 2
    auto f = choose_coefficients(s, 32);
    REQUIRE(f.puncture_poles.size() == 1);
    CHECK(std::abs(f.puncture_poles[0].coeff - Complex{0.5, 0.0}) < 1e-15);
    CHECK(f.strip_halfwidth == Approx(0.25));
}

TEST_CASE("choose_coefficients slit directions") {
    StandardDomain s = StandardDomain::plane_minus_L();
    s.slits.push_back(PlanarCurve::segment({1.0, 1.0}, {2.0, 1.0}));
    s.slits.push_back(PlanarCurve::segment({1.0, -1.0}, {2.0, -2.0}));
    auto f = choose_coefficients(s, 0);
    REQUIRE(f.thetas.size() == 2);
    CHECK(f.thetas[0] == Approx(-M_PI / 2.0));
    CHECK(f.thetas[1] == Approx(0.0));
    // min pairwise angular gap of {theta_j} u {pi} is the equal spacing
    std::vector<double> angles = f.thetas;
    angles.push_back(M_PI);
    double min_gap = kInf;
    for (std::size_t i = 0; i < angles.size(); ++i)
        for (std::size_t j = i + 1; j < angles.size(); ++j) {
            double d = std::abs(angles[i] - angles[j]);
            d = std::min(d, 2.0 * M_PI - d);
            min_gap = std::min(min_gap, d);
        }
    CHECK(min_gap >= 2.0 * M_PI / 4.0 - 1e-12);

    StandardDomain bad = StandardDomain::plane_minus_L();
    bad.slits.push_back(PlanarCurve::segment({-2.0, 0.0}, {-2.0, 1.0}));
    CHECK_THROWS_AS(choose_coefficients(bad, 0), StructuralError);
}

TEST_CASE("omega evaluation") {
    EmbeddedSurface surf;
    surf.domain = StandardDomain::plane_minus_L();
    surf.f = choose_coefficients(surf.domain, 0);
    const C2Point a = omega(Complex{5.0, 0.0}, surf);
    CHECK(std::abs(a.z - Complex{5.0, 0.0}) == 0.0);
    CHECK(std::abs(a.w) == 0.0);

    EmbeddedSurface punct;
    punct.f.puncture_poles.push_back({{0.0, 0.0}, {1.0, 0.0}});
    for (int k = 1; k <= 12; ++k) {
        const C2Point x = omega(Complex{std::pow(2.0, -k), 0.0}, punct);
        CHECK(std::abs(x.w - std::pow(2.0, k)) < 1e-6 * std::pow(2.0, k));
        CHECK(norm(x) >= std::pow(2.0, k));
    }
    CHECK_THROWS_AS(omega(Complex{0.0, 0.0}, punct), PoleError);

    EmbeddedSurface slit;
    slit.f.slit_poles.push_back({{1.0, 0.0}, {1.0, 0.0}});
    const C2Point s = omega(Complex{1.5, 0.0}, slit);
    CHECK(std::abs(s.w - Complex{2.0, 0.0}) < 1e-12);
}

TEST_CASE("omega is injective on samples") {
    EmbeddedSurface surf;
    surf.domain = StandardDomain::plane_minus_L();
    surf.domain.punctures = PunctureSet::from_list({{2.0, 2.0}});
    surf.f = choose_coefficients(surf.domain, 8);
    auto pts = disc_samples({0.0, 0.0}, 4.0, 300);
    for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
        if (surf.f.dist_to_nearest_pole(pts[i]) < 1e-3 ||
            surf.f.dist_to_nearest_pole(pts[i + 1]) < 1e-3)
            continue;
        const C2Point a = omega(pts[i], surf);
        const C2Point b = omega(pts[i + 1], surf);
        CHECK(a.z != b.z);  // first coordinate is the identity
    }
}

TEST_CASE("f stays bounded over L by the recorded strip halfwidth") {
    StandardDomain s = StandardDomain::plane_minus_L();
    s.slits.push_back(PlanarCurve::segment({1.0, 1.0}, {2.0, 2.0}));
    s.punctures = PunctureSet::from_rule(
        [](int j) { return Complex(0.5 + 0.1 * j, 1.0 + 0.2 * j); }, 16);
    auto f = choose_coefficients(s, 16);
    for (int k = 0; k < 1000; ++k) {
        const Complex z(-1.0 - 64.0 * k / 999.0, 0.0);
        CHECK(std::abs(f(z)) <= f.strip_halfwidth + 1e-12);
    }
}

TEST_CASE("truncation stability from N=32 to N=64") {
    StandardDomain s = StandardDomain::plane_minus_L();
    s.punctures = PunctureSet::from_rule(
        [](int j) { return Complex(0.0, 2.0 + static_cast<double>(j)); }, 64);
    auto f32 = choose_coefficients(s, 32);
    auto f64 = choose_coefficients(s, 64);
    for (const Complex& z : disc_samples({0.0, 0.0}, 1.0, 200))
        CHECK(std::abs(f64(z) - f32(z)) < std::pow(2.0, -30));
}

TEST_CASE("image curves") {
    EmbeddedSurface plain;
    plain.domain = StandardDomain::plane_minus_L();
    plain.f = choose_coefficients(plain.domain, 0);
    auto imgs = image_curves(plain, 64);
    REQUIRE(imgs.curves.size() == 1);  // just the half-line image
    for (std::size_t k = 0; k < imgs.curves[0].size(); ++k) {
        const C2Point& x = imgs.curves[0][k];
        CHECK(std::abs(x.z - Complex(-1.0 - imgs.params[0][k], 0.0)) < 1e-12);
        CHECK(std::abs(x.w) == 0.0);
    }
    CHECK(imgs.strip_sup == 0.0);

    EmbeddedSurface surf;
    surf.domain = StandardDomain::plane_minus_L();
    surf.domain.slits.push_back(
        PlanarCurve::analytic([](double t) { return Complex(1.0 + t, 0.0); }, 0.0, 1.0));
    surf.f.slit_poles.push_back({{1.0, 0.0}, {1.0, 0.0}});
    auto si = image_curves(surf, 128);
    REQUIRE(si.curves.size() == 2);
    // gamma_1(t) = ((1+t, 0), 1/t): at t=0.5 the image is ((1.5,0),(2,0))
    const auto& ps = si.params[0];
    for (std::size_t k = 0; k < ps.size(); ++k) {
        const C2Point& x = si.curves[0][k];
        CHECK(std::abs(x.z - Complex(1.0 + ps[k], 0.0)) < 1e-12);
        CHECK(std::abs(x.w - 1.0 / ps[k]) < 1e-9 / ps[k]);
        CHECK(norm(x) >= 1.0 / ps[k]);
    }
}

TEST_CASE("projection asymptotics: line fixtures") {
    auto line = PlanarCurve::analytic([](double t) { return Complex(t, 0.0); }, 0.0, 1.0);
    auto rep = lemma2_check(line, Complex{1.0, 0.0}, zero_map(), geometric_grid(20));
    CHECK(rep.verdict);
    CHECK(rep.delta == Approx(1.0));
    CHECK(rep.R == Approx(std::sqrt(0.5)).margin(1e-6));

    auto rep_i = lemma2_check(line, Complex{0.0, 1.0}, zero_map(), geometric_grid(20));
    CHECK(rep_i.verdict);
    CHECK(rep_i.delta == Approx(1.0));

    auto quad = poly_map({{0.0, 0.0}, {1.0, 0.0}});  // eps(z) = z^2
    auto rep_q = lemma2_check(line, Complex{1.0, 0.0}, quad, geometric_grid(20));
    CHECK(rep_q.verdict);
    CHECK(rep_q.delta > 0.3);
    CHECK(rep_q.delta < 1.0);

    // grid stability: 2x finer grid reproduces delta and R within 5%
    std::vector<double> fine;
    for (int k = 40; k >= 0; --k) fine.push_back(std::pow(2.0, -0.5 * k));
    auto rep_f = lemma2_check(line, Complex{1.0, 0.0}, quad, fine);
    CHECK(rep_f.delta == Approx(rep_q.delta).epsilon(0.05));
    CHECK(rep_f.R == Approx(rep_q.R).epsilon(0.05));
}

TEST_CASE("projection asymptotics: degenerate and failing inputs") {
    auto flat = PlanarCurve::analytic([](double t) { return Complex(t * t, 0.0); }, 0.0, 1.0);
    CHECK_THROWS_AS(lemma2_check(flat, Complex{1.0, 0.0}, zero_map(), geometric_grid(10)),
                    PreconditionError);
    // growing |pi| from the first pair: a tiny, curve heading outward
    auto line = PlanarCurve::analytic([](double t) { return Complex(2.0 + t, 0.0); }, 0.0, 1.0);
    auto rep = lemma2_check(line, Complex{1e-9, 0.0}, zero_map(), geometric_grid(4));
    CHECK_FALSE(rep.verdict);
}

TEST_CASE("diagonal rotation reproduces the projection") {
    auto line = PlanarCurve::analytic([](double t) { return Complex(t, 0.0); }, 0.0, 1.0);
    const Complex a{0.3, 0.4};
    auto quad = poly_map({{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}});
    const Auto rot = diagonal_rotation();
    for (double t : {0.1, 0.25, 0.7}) {
        const Complex g = line.at(t);
        const Complex g0 = line.at(0.0);
        const C2Point lifted{g, a / (g - g0) + quad(g)};
        const Complex pi = std::sqrt(0.5) * (g + quad(g) + a / (g - g0));
        CHECK(std::abs(rot.apply(lifted).z - pi) < 1e-12);
    }
}

TEST_CASE("properness probes") {
    EmbeddedSurface plain;
    plain.domain = StandardDomain::plane_minus_L();
    plain.f = choose_coefficients(plain.domain, 0);
    auto om = [&](Complex z) { return omega(z, plain); };

    std::vector<Complex> ints;
    for (int j = 1; j <= 1200; ++j) ints.push_back(Complex(static_cast<double>(j), 0.0));
    auto rep = properness_probe(om, ints, 1000.0);
    CHECK(rep.proper);
    CHECK(rep.first_exceed_index == 1001);

    EmbeddedSurface punct;
    punct.f.puncture_poles.push_back({{0.0, 0.0}, {1.0, 0.0}});
    auto om2 = [&](Complex z) { return omega(z, punct); };
    std::vector<Complex> dy;
    for (int k = 1; k <= 20; ++k) dy.push_back(Complex(std::pow(2.0, -k), 0.0));
    auto rep2 = properness_probe(om2, dy, 1000.0);
    CHECK(rep2.proper);
    CHECK(rep2.first_exceed_index == 10);

    std::vector<Complex> constant(40, Complex{0.5, 0.0});
    auto rep3 = properness_probe(om2, constant, 1000.0);
    CHECK_FALSE(rep3.proper);
}
