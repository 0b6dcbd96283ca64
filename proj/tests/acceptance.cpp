#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fbembed/pipeline.hpp"

// Acceptance gate: one suite per criterion, one printed pass/fail line each.
// Every claim is verified at sampled resolution with the deterministic
// sampling the library uses throughout, so reruns are byte-stable.

using namespace fbembed;

namespace {

void verdict(int n, const char* name, bool pass) {
    std::printf("criterion %d (%s): %s\n", n, name, pass ? "PASS" : "FAIL");
    std::fflush(stdout);
    CHECK(pass);
}

template <typename Fn>
void criterion(int n, const char* name, Fn&& body) {
    bool pass = false;
    std::string note;
    try {
        pass = body();
    } catch (const std::exception& e) {
        note = e.what();
    }
    if (!note.empty()) std::printf("  [%s]\n", note.c_str());
    verdict(n, name, pass);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("fbembed_acc_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

// split a CSV row on commas
std::vector<std::string> cells(const std::string& line) {
    std::vector<std::string> out;
    std::size_t from = 0;
    while (true) {
        const auto to = line.find(',', from);
        out.push_back(line.substr(from, to - from));
        if (to == std::string::npos) return out;
        from = to + 1;
    }
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(cells(line));
    return rows;
}

const char* kFlatRun = R"({
    "steps": 8,
    "render": {"resolution": 256, "window": [-3.0, 3.0, -3.0, 3.0]}
})";

const char* kPuncturedRun = R"({
    "domain": {"punctures": [[1.0, 0.0]]},
    "steps": 5,
    "render": {"resolution": 64, "window": [-2.0, 2.0, -2.0, 2.0]},
    "properness": {"M": 1000.0, "k_max": 14, "base": [1.0, 0.0]}
})";

struct PipelineCheck {
    bool ran = false;
    bool ok = false;
    int steps = 0;
};

PipelineCheck check_flat_outputs(const std::filesystem::path& dir) {
    PipelineCheck out;
    out.ran = true;
    const auto rows = csv_rows(slurp(dir / "steps.csv"));
    out.steps = static_cast<int>(rows.size()) - 1;
    bool flags = out.steps >= 6;
    for (std::size_t i = 1; i < rows.size(); ++i)
        flags = flags && rows[i][6] == "1" && rows[i][7] == "1" && rows[i][8] == "1";
    const auto stats = csv_rows(slurp(dir / "slice_stats.csv"));
    long on_total = 0, on_inside = 0, far_total = 0, far_inside = 0;
    for (std::size_t i = 1; i < stats.size(); ++i) {
        if (stats[i][0] == "on_boundary") {
            on_total = std::stol(stats[i][1]);
            on_inside = std::stol(stats[i][2]);
        } else if (stats[i][0] == "clear") {
            far_total = std::stol(stats[i][1]);
            far_inside = std::stol(stats[i][2]);
        }
    }
    out.ok = flags && on_inside == 0 && far_total > 0 &&
             far_inside >= static_cast<long>(0.95 * far_total) && on_total >= 0;
    return out;
}

}  // namespace

TEST_CASE("criterion 1") {
    criterion(1, "mu suite", [] {
        bool ok = true;
        // 10^4 interior samples land off L
        auto interior = disc_samples({0.0, 0.0}, 1.0, 10000);
        for (const Complex& z : interior) ok = ok && dist_to_half_line(mu(z)) > 0.0;
        // 10^3 boundary samples land on L
        for (const Complex& z : circle_samples({0.0, 0.0}, 1.0, 1000)) {
            if (std::abs(z - 1.0) < 1e-2) continue;  // |mu| blows up; fp noise > 1e-9
            ok = ok && dist_to_half_line(mu(z)) < 1e-9;
        }
        // blow-up along the radius toward 1
        for (int j = 10; j <= 16; ++j)
            ok = ok && std::abs(mu(Complex(1.0 - std::pow(2.0, -j), 0.0))) > 1e6;
        // surjectivity probes: targets in a box, clear of L
        int done = 0;
        for (std::size_t i = 1; done < 100; ++i) {
            const auto h = halton_point<2>(i);
            const Complex target(8.0 * h[0] - 4.0, 8.0 * h[1] - 4.0);
            if (dist_to_half_line(target) < 1e-3) continue;
            const Complex pre = mu_preimage(target);
            ok = ok && std::abs(pre) < 1.0 && std::abs(mu(pre) - target) < 1e-10;
            ++done;
        }
        return ok;
    });
}

TEST_CASE("criterion 2") {
    criterion(2, "slit-map suite", [] {
        bool ok = true;
        std::vector<ComplementComponent> disc{
            ComplementComponent::disc({0.0, 0.0}, 1.0, false)};
        auto inner = hilbert_slit_map_fit(disc, CPoint(Complex{0.0, 0.0}), 0.0);
        for (const Complex& z : disc_samples({0.0, 0.0}, 0.95, 200)) {
            if (std::abs(z) < 0.2) continue;
            ok = ok && std::abs(inner(z) - (1.0 / z + z)) < 1e-8;
        }
        ok = ok && std::abs(inner.alpha1 - 1.0) < 1e-6;

        std::vector<ComplementComponent> ext{
            ComplementComponent::disc({0.0, 0.0}, 1.0, true)};
        auto outer = hilbert_slit_map_fit(ext, CPoint::infinity(), 0.0);
        for (const Complex& z : circle_samples({0.0, 0.0}, 1.7, 200))
            ok = ok && std::abs(outer(z) - (z + 1.0 / z)) < 1e-8;
        ok = ok && std::abs(outer.alpha1 - 1.0) < 1e-6;

        std::vector<ComplementComponent> annulus{
            ComplementComponent::disc({0.0, 0.0}, 0.5, true),
            ComplementComponent::disc({0.0, 0.0}, 1.0, false)};
        SlitFitBudget budget;
        budget.degree = 64;
        auto ann = hilbert_slit_map_fit(annulus, CPoint(Complex{0.75, 0.0}), 0.0, budget);
        return ok && ann.residual < 1e-6;
    });
}

TEST_CASE("criterion 3") {
    criterion(3, "classification suite", [] {
        bool ok = true;
        {
            DomainSpec spec;
            spec.limit = CPoint::infinity();
            spec.punctures = PunctureSet::from_rule(
                [](int j) { return Complex(static_cast<double>(j), 0.0); }, 30);
            auto res = classify_to_standard(spec);
            ok = ok && !res.domain.has_half_line && res.domain.slits.empty() &&
                 res.domain.punctures.truncation == 30;
        }
        {
            DomainSpec spec;
            spec.components.push_back(ComplementComponent::point({0.0, 0.0}));
            spec.limit = CPoint(Complex{0.0, 0.0});
            spec.punctures = PunctureSet::from_rule(
                [](int j) { return Complex(std::pow(2.0, -j), 0.0); }, 24);
            auto res = classify_to_standard(spec);
            const auto pts = res.domain.punctures.points();
            ok = ok && pts.size() == 24;
            for (int j = 1; j <= 24 && ok; ++j)
                ok = std::abs(pts[static_cast<std::size_t>(j - 1)] - std::pow(2.0, j)) <
                     1e-9 * std::pow(2.0, j);
        }
        {
            DomainSpec spec;
            spec.components.push_back(ComplementComponent::disc({0.0, 0.0}, 1.0, false));
            spec.limit = CPoint(Complex{1.0, 0.0});
            spec.punctures = PunctureSet::from_rule(
                [](int j) { return Complex(1.0 - std::pow(2.0, -j), 0.0); }, 16);
            spec.witness = PlanarCurve::segment({0.0, 0.0}, {1.0, 0.0});
            spec.has_witness = true;
            auto res = classify_to_standard(spec);
            ok = ok && res.domain.has_half_line;
            const auto pts = res.domain.punctures.points();
            ok = ok && pts.size() == 16;
            // output punctures are discrete within the test window
            for (std::size_t i = 0; i < pts.size() && ok; ++i)
                for (std::size_t j = i + 1; j < pts.size() && ok; ++j)
                    ok = std::abs(pts[i] - pts[j]) > 1e-6;
        }
        return ok;
    });
}

TEST_CASE("criterion 4") {
    criterion(4, "projection asymptotics suite", [] {
        auto line =
            PlanarCurve::analytic([](double t) { return Complex(t, 0.0); }, 0.0, 1.0);
        const MapHandle zero = detail::series_handle({{0.0, 0.0}});
        const MapHandle quad = detail::series_handle({{0.0, 0.0}, {1.0, 0.0}});
        struct Fx {
            Complex a;
            const MapHandle* eps;
        } fixtures[] = {{{1.0, 0.0}, &zero}, {{0.0, 1.0}, &zero}, {{1.0, 0.0}, &quad}};
        bool ok = true;
        for (const Fx& f : fixtures) {
            auto rep = lemma2_check(line, f.a, *f.eps, geometric_grid(20));
            ok = ok && rep.verdict;
            // 2x finer grid reproduces delta and R within 5%
            std::vector<double> fine;
            for (int k = 40; k >= 0; --k) fine.push_back(std::pow(2.0, -0.5 * k));
            auto rep2 = lemma2_check(line, f.a, *f.eps, fine);
            ok = ok && rep2.verdict && std::abs(rep2.delta - rep.delta) <= 0.05 * rep.delta &&
                 std::abs(rep2.R - rep.R) <= 0.05 * std::max(rep.R, 1e-12);
        }
        return ok;
    });
}

TEST_CASE("criterion 5") {
    criterion(5, "automorphism algebra", [] {
        bool ok = true;
        std::vector<Auto> fixtures{
            contraction_power(1), diagonal_rotation(),
            Auto::w_shear(ShearFunction::monomials({{0.0, 0.0}, {1.0, 0.0}})),
            Auto::z_shear(ShearFunction::monomials({{0.5, 0.5}, {0.0, 0.0}, {1.0, 0.0}})),
            Auto::composition(
                {contraction_power(1),
                 Auto::w_shear(ShearFunction::monomials({{0.0, 0.0}, {1.0, 0.0}})),
                 diagonal_rotation()})};
        const auto pts = ball_samples(3.0, 1000);
        for (const Auto& F : fixtures)
            for (const C2Point& x : pts)
                ok = ok && norm(F.apply_inverse(F.apply(x)) - x) < 1e-10 * (1.0 + norm(x));

        ContractionParams params;
        ok = ok && star_condition_check(contraction_power(1), params).ok;
        const Auto bump = Auto::composition(
            {Auto::w_shear(ShearFunction::monomials({{0.0, 0.0}, {0.02, 0.0}})),
             contraction_power(1)});
        ok = ok && star_condition_check(bump, params).ok;
        const Auto big_bump = Auto::composition(
            {Auto::w_shear(ShearFunction::monomials({{0.0, 0.0}, {2.0, 0.0}})),
             contraction_power(1)});
        ok = ok && !star_condition_check(big_bump, params).ok;

        ok = ok && norm_bounds_check(contraction_power(1), params);
        ok = ok && norm_bounds_check(bump, params);
        ok = ok && !norm_bounds_check(Auto::linear(0.5, 0.0, 0.0, 2.0), params);

        // Theorem-2 constraint for the default pair, and a violating pair
        params.validate();  // (0.45, 0.55): r^2 = 0.3025 < 0.45
        ContractionParams bad;
        bad.s = 0.3;
        bad.r = 0.6;
        bool threw = false;
        try {
            bad.validate();
        } catch (const PreconditionError&) {
            threw = true;
        }
        return ok && threw;
    });
}

TEST_CASE("criterion 6") {
    criterion(6, "pusher suite", [] {
        bool ok = true;
        auto problems = detail::bundled_push_problems();
        for (const PushProblem& prob : problems) {
            auto res = synthesize_push(prob);
            ok = ok && res.verified;
            // independent dense re-verification with relaxed margins
            const PushReport dense = detail::verify_push(res.phi, prob, 2);
            ok = ok && dense.supK < prob.eps * 1.05 && dense.min_curve_norm > prob.R * 0.95;
        }
        PushProblem starved = problems[1];
        starved.budgets.degree_budget = 1;
        starved.budgets.retry_budget = 1;
        bool threw = false;
        try {
            synthesize_push(starved);
        } catch (const UnpushableError&) {
            threw = true;
        }
        return ok && threw;
    });
}

namespace {
std::filesystem::path flat_dir_a, punct_dir_a;
}

TEST_CASE("criterion 7") {
    criterion(7, "end-to-end basin on the flat domain", [] {
        flat_dir_a = fresh_dir("flat_a");
        RunConfig cfg = parse_config_text(kFlatRun);
        RunReport rep = run_subcommand("full-pipeline", cfg, flat_dir_a.string());
        if (rep.exit_code != 0) return false;
        const PipelineCheck chk = check_flat_outputs(flat_dir_a);
        return chk.ran && chk.ok && chk.steps >= 6;
    });
}

TEST_CASE("criterion 8") {
    criterion(8, "punctured pipeline", [] {
        punct_dir_a = fresh_dir("punct_a");
        RunConfig cfg = parse_config_text(kPuncturedRun);
        RunReport rep = run_subcommand("full-pipeline", cfg, punct_dir_a.string());
        if (rep.exit_code != 0) return false;
        const auto rows = csv_rows(slurp(punct_dir_a / "steps.csv"));
        bool flags = rows.size() >= 5;  // header + >= 4 steps
        for (std::size_t i = 1; i < rows.size(); ++i)
            flags = flags && rows[i][6] == "1" && rows[i][7] == "1" && rows[i][8] == "1";
        // properness along zeta = 1 + 2^{-k}: |omega| = b_1 2^k + O(1) first
        // clears M = 10^3 at k = 11 (b_1 = 1/2, so 2^{k-1} > 1000 needs k = 11)
        EmbeddedSurface surf = detail::make_surface(cfg);
        PropernessReport prep;
        detail::properness_table(surf, cfg.properness, prep);
        return flags && prep.proper && prep.first_exceed_index == 11;
    });
}

TEST_CASE("criterion 9") {
    criterion(9, "byte determinism of the pipeline runs", [] {
        if (flat_dir_a.empty() || punct_dir_a.empty()) return false;
        const auto flat_b = fresh_dir("flat_b");
        const auto punct_b = fresh_dir("punct_b");
        if (run_subcommand("full-pipeline", parse_config_text(kFlatRun), flat_b.string(),
                           2)
                .exit_code != 0)
            return false;
        if (run_subcommand("full-pipeline", parse_config_text(kPuncturedRun),
                           punct_b.string(), 2)
                .exit_code != 0)
            return false;
        bool ok = true;
        for (const char* name : {"slice.ppm", "slice_stats.csv", "steps.csv", "poles.csv"})
            ok = ok && slurp(flat_dir_a / name) == slurp(flat_b / name);
        for (const char* name :
             {"slice.ppm", "slice_stats.csv", "steps.csv", "poles.csv", "properness.csv"})
            ok = ok && slurp(punct_dir_a / name) == slurp(punct_b / name);
        return ok;
    });
}
