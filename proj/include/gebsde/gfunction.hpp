#pragma once

#include <cmath>
#include <string>

#include "gebsde/errors.hpp"

namespace gebsde {

/// Symmetric 2x2 matrix, the largest argument dimension the toolkit needs.
struct Sym2 {
    double a11 = 0.0;
    double a22 = 0.0;
    double a12 = 0.0;
};

/// Volatility uncertainty interval [sigma_lo_sq, sigma_hi_sq] for the
/// quadratic variation rate. dim=2 means the product of two independent
/// copies of the same interval with diagonal covariance.
struct UncertaintyInterval {
    double sigma_lo_sq = 1.0;
    double sigma_hi_sq = 1.0;
    int dim = 1;

    UncertaintyInterval() = default;
    UncertaintyInterval(double lo_sq, double hi_sq, int d = 1)
        : sigma_lo_sq(lo_sq), sigma_hi_sq(hi_sq), dim(d) {
        if (!(lo_sq > 0.0) || !(lo_sq <= hi_sq) || !std::isfinite(hi_sq))
            throw ConfigError("uncertainty interval requires 0 < sigma_lo_sq <= sigma_hi_sq, got ["
                              + std::to_string(lo_sq) + ", " + std::to_string(hi_sq) + "]");
        if (d != 1 && d != 2)
            throw ConfigError("uncertainty interval dimension must be 1 or 2");
    }

    bool degenerate() const { return sigma_lo_sq == sigma_hi_sq; }
};

/// The sublinear generator of the interval: the half-sup of tr(A v) over
/// admissible covariances v. Monotone, positively homogeneous, subadditive,
/// and sandwiched between the classical generators at the interval endpoints.
class GFunction {
public:
    GFunction() = default;
    explicit GFunction(UncertaintyInterval iv) : interval_(iv) {}

    const UncertaintyInterval& interval() const { return interval_; }
    int dim() const { return interval_.dim; }
    double sigma_lo_sq() const { return interval_.sigma_lo_sq; }
    double sigma_hi_sq() const { return interval_.sigma_hi_sq; }

    /// Scalar argument (dim must be 1): (1/2)(hi * a+ - lo * a-).
    double operator()(double a) const {
        if (interval_.dim != 1)
            throw ConfigError("g_eval: scalar argument but interval dimension is "
                              + std::to_string(interval_.dim));
        return scalar(a);
    }

    /// 2x2 symmetric argument (dim must be 2). The admissible covariances are
    /// diagonal, so only the diagonal of the argument contributes; a12 is
    /// carried for interface completeness and enters degenerately.
    double operator()(const Sym2& a) const {
        if (interval_.dim != 2)
            throw ConfigError("g_eval: 2x2 argument but interval dimension is "
                              + std::to_string(interval_.dim));
        return scalar(a.a11) + scalar(a.a22);
    }

    /// gamma1 + 2 G(gamma2); callers treat >= 0 as infeasible ergodic weighting.
    double dissipativity_margin(double gamma1, double gamma2) const {
        if (interval_.dim != 1)
            throw ConfigError("dissipativity_margin: scalar gamma2 needs interval dimension 1");
        return gamma1 + 2.0 * scalar(gamma2);
    }
    double dissipativity_margin(double gamma1, const Sym2& gamma2) const {
        return gamma1 + 2.0 * (*this)(gamma2);
    }

private:
    double scalar(double a) const {
        return a >= 0.0 ? 0.5 * interval_.sigma_hi_sq * a
                        : 0.5 * interval_.sigma_lo_sq * a;
    }

    UncertaintyInterval interval_{};
};

/// Free-function spellings used throughout the solvers.
inline double g_eval(const GFunction& g, double a) { return g(a); }
inline double g_eval(const GFunction& g, const Sym2& a) { return g(a); }
inline double dissipativity_margin(const GFunction& g, double gamma1, double gamma2) {
    return g.dissipativity_margin(gamma1, gamma2);
}

}  // namespace gebsde
