#include "vstain/stats.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "vstain/errors.hpp"

namespace vstain {
namespace {

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

// Σ (x − mean)²
double centered_ss(std::span<const double> v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s;
}

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " contains NaN or Inf");
    }
}

}  // namespace

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw Error(ErrorCode::DimensionMismatch, std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
    }
    if (xs.size() < 3) throw Error(ErrorCode::TooFewSamples, "pearson needs at least 3 pairs");
    require_finite(xs, "xs");
    require_finite(ys, "ys");
    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my);
    const double sxx = centered_ss(xs, mx);
    const double syy = centered_ss(ys, my);
    if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::ZeroVariance, "pearson input has zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double student_t_two_sided(double t, double dof) {
    if (!(dof > 0.0)) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
    if (std::isnan(t)) throw Error(ErrorCode::InvalidArgument, "t is NaN");
    if (std::isinf(t)) return 0.0;
    return std::clamp(boost::math::ibeta(dof / 2.0, 0.5, dof / (dof + t * t)), 0.0, 1.0);
}

TTestResult ttest(std::span<const double> a, std::span<const double> b, TTestVariant variant) {
    if (a.size() < 2 || b.size() < 2) throw Error(ErrorCode::TooFewSamples, "t-test needs at least 2 per group");
    require_finite(a, "group a");
    require_finite(b, "group b");
    const double na = double(a.size());
    const double nb = double(b.size());
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    const double va = centered_ss(a, ma) / (na - 1.0);
    const double vb = centered_ss(b, mb) / (nb - 1.0);

    TTestResult r;
    r.n_a = a.size();
    r.n_b = b.size();
    double se2;
    if (variant == TTestVariant::pooled) {
        r.dof = na + nb - 2.0;
        const double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / r.dof;
        se2 = sp2 * (1.0 / na + 1.0 / nb);
    } else {
        const double qa = va / na;
        const double qb = vb / nb;
        se2 = qa + qb;
        r.dof = se2 > 0.0 ? se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0)) : na + nb - 2.0;
    }
    if (se2 == 0.0) {
        if (ma == mb) return r;
        throw Error(ErrorCode::DegenerateVariance, "both groups constant with different means");
    }
    r.t = (ma - mb) / std::sqrt(se2);
    r.p = student_t_two_sided(r.t, r.dof);
    return r;
}

}  // namespace vstain
