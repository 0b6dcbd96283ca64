#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "fbembed/errors.hpp"
#include "fbembed/lowdisc.hpp"

// Discrete least-squares polynomial fitting on arbitrary planar point sets,
// using an Arnoldi-orthogonalized basis so that high degrees stay
// well-conditioned. The fitted polynomial is evaluated through the same
// recurrence, never through raw monomial coefficients.

namespace fbembed {

class PolyFit {
  public:
    PolyFit() = default;

    /// Fits a polynomial of the given degree to targets over pts.
    static PolyFit fit(const std::vector<Complex>& pts, const std::vector<Complex>& targets,
                       int degree) {
        if (pts.size() != targets.size() || pts.empty())
            throw PreconditionError("PolyFit: mismatched or empty sample set");
        const auto m = static_cast<Eigen::Index>(pts.size());
        const Eigen::Index n = std::min<Eigen::Index>(degree, m - 1);

        Eigen::MatrixXcd Q(m, n + 1);
        Q.col(0).setOnes();
        Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n + 1, std::max<Eigen::Index>(n, 1));
        Eigen::VectorXcd zv(m);
        for (Eigen::Index i = 0; i < m; ++i) zv(i) = pts[static_cast<std::size_t>(i)];

        const double scale = 1.0 / static_cast<double>(m);
        for (Eigen::Index k = 0; k < n; ++k) {
            Eigen::VectorXcd q = zv.cwiseProduct(Q.col(k));
            for (Eigen::Index j = 0; j <= k; ++j) {
                H(j, k) = Q.col(j).dot(q) * scale;
                q -= H(j, k) * Q.col(j);
            }
            // second orthogonalization pass: without it the basis drifts at
            // high degree and recurrence evaluation no longer matches it
            for (Eigen::Index j = 0; j <= k; ++j) {
                const Complex h2 = Q.col(j).dot(q) * scale;
                q -= h2 * Q.col(j);
                H(j, k) += h2;
            }
            H(k + 1, k) = q.norm() * std::sqrt(scale);
            if (std::abs(H(k + 1, k)) < 1e-300) {
                // basis exhausted; truncate
                Q.conservativeResize(m, k + 1);
                H.conservativeResize(k + 1, k);
                break;
            }
            Q.col(k + 1) = q / H(k + 1, k);
        }

        Eigen::VectorXcd f(m);
        for (Eigen::Index i = 0; i < m; ++i) f(i) = targets[static_cast<std::size_t>(i)];

        PolyFit out;
        out.hes_ = H;
        out.coef_ = Q.householderQr().solve(f);
        return out;
    }

    int degree() const { return static_cast<int>(coef_.size()) - 1; }

    Complex operator()(Complex z) const {
        if (coef_.size() == 0) return {};
        const Eigen::Index n = coef_.size() - 1;
        Eigen::VectorXcd w(n + 1);
        w(0) = 1.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            Complex v = z * w(k);
            for (Eigen::Index j = 0; j <= k; ++j) v -= hes_(j, k) * w(j);
            w(k + 1) = v / hes_(k + 1, k);
        }
        Complex y{};
        for (Eigen::Index j = 0; j <= n; ++j) y += coef_(j) * w(j);
        return y;
    }

    /// Derivative by the same recurrence, differentiated termwise.
    Complex derivative(Complex z) const {
        if (coef_.size() == 0) return {};
        const Eigen::Index n = coef_.size() - 1;
        Eigen::VectorXcd w(n + 1), dw(n + 1);
        w(0) = 1.0;
        dw(0) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            Complex v = z * w(k);
            Complex dv = w(k) + z * dw(k);
            for (Eigen::Index j = 0; j <= k; ++j) {
                v -= hes_(j, k) * w(j);
                dv -= hes_(j, k) * dw(j);
            }
            w(k + 1) = v / hes_(k + 1, k);
            dw(k + 1) = dv / hes_(k + 1, k);
        }
        Complex y{};
        for (Eigen::Index j = 0; j <= n; ++j) y += coef_(j) * dw(j);
        return y;
    }

    double max_residual(const std::vector<Complex>& pts,
                        const std::vector<Complex>& targets) const {
        double worst = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            worst = std::max(worst, std::abs((*this)(pts[i]) - targets[i]));
        return worst;
    }

  private:
    Eigen::MatrixXcd hes_;
    Eigen::VectorXcd coef_;
};

/// Entire-function approximation on a sample set, degree escalated by
/// doubling until the residual target is met. The g(0) = 0 constraint is
/// enforced by exact post-subtraction (0 must be among the zero-target
/// samples so the subtraction stays within the residual).
struct ConstrainedPoly {
    PolyFit poly;
    Complex offset{};  // subtracted so that g(0) = 0 exactly
    Complex slope{};   // linear term subtracted so that g'(0) = 0 if required
    double residual = kInf;
    int degree = 0;

    Complex operator()(Complex z) const { return poly(z) - offset - slope * z; }
};

inline ConstrainedPoly fit_entire_approx(const std::vector<Complex>& pts,
                                         const std::vector<Complex>& targets, double tol,
                                         int degree_budget, int degree_start = 4) {
    ConstrainedPoly best;
    auto next = [&](int d) {
        // finer steps at high degree: the recurrence loses accuracy there, so
        // a doubling jump can skip the best achievable degree entirely
        return std::min(d < 32 ? 2 * d : d + 32, degree_budget);
    };
    for (int d = degree_start;; d = next(d)) {
        PolyFit p = PolyFit::fit(pts, targets, d);
        ConstrainedPoly cand;
        cand.poly = p;
        cand.offset = p(Complex{0.0, 0.0});
        cand.degree = p.degree();
        double worst = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            worst = std::max(worst, std::abs(cand(pts[i]) - targets[i]));
        cand.residual = worst;
        if (cand.residual < best.residual) best = cand;
        if (best.residual <= tol || d >= degree_budget) break;
    }
    return best;
}

}  // namespace fbembed
