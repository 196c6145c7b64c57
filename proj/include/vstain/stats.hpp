#pragma once

#include <cstddef>
#include <span>

namespace vstain {

/// Sample Pearson r, computed two-pass and clamped to [−1, 1].
double pearson(std::span<const double> xs, std::span<const double> ys);

enum class TTestVariant { welch, pooled };

struct TTestResult {
    double t = 0.0;
    double dof = 0.0;
    double p = 1.0;  // two-sided
    std::size_t n_a = 0;
    std::size_t n_b = 0;
};

/// Two-sample t-test. Two constant groups with equal means give t = 0, p = 1;
/// with different means the statistic is undefined (DegenerateVariance).
TTestResult ttest(std::span<const double> a, std::span<const double> b, TTestVariant variant = TTestVariant::welch);

/// P(|T| ≥ |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided(double t, double dof);

}  // namespace vstain
