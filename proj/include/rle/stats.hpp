#pragma once

#include "rle/types.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace rle::stats {

/// Neumaier-compensated sum; the result does not depend on summation order
/// beyond rounding of the compensated total.
inline double compensated_sum(std::span<const double> values)
{
    double sum = 0, comp = 0;
    for (double v : values)
    {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

struct MeanEstimate
{
    double mean = 0;
    double stderr_ = 0;  // standard error of the mean
    double stddev = 0;
    std::size_t count = 0;
};

inline MeanEstimate mean_estimate(std::span<const double> values)
{
    MeanEstimate e;
    e.count = values.size();
    if (values.empty())
        return e;
    e.mean = compensated_sum(values) / static_cast<double>(values.size());
    if (values.size() > 1)
    {
        std::vector<double> sq(values.size());
        std::transform(values.begin(), values.end(), sq.begin(),
                       [&](double v) { return (v - e.mean) * (v - e.mean); });
        e.stddev = std::sqrt(compensated_sum(sq) / static_cast<double>(values.size() - 1));
        e.stderr_ = e.stddev / std::sqrt(static_cast<double>(values.size()));
    }
    return e;
}

inline double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Survival function of the Kolmogorov distribution, P(K > lambda).
inline double kolmogorov_survival(double lambda)
{
    if (lambda < 0.2)
        return 1.0;
    double sum = 0;
    for (int k = 1; k <= 100; ++k)
    {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? term : -term);
        if (term < 1e-17)
            break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Asymptotic p-value for a KS statistic with effective sample size n,
/// using the Stephens small-sample correction.
inline double ks_p_value(double statistic, double effective_n)
{
    const double sn = std::sqrt(effective_n);
    return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * statistic);
}

struct KsResult
{
    double statistic = 0;
    double p_value = 1;
};

/// One-sample KS test against a continuous CDF.
inline KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf)
{
    if (samples.empty())
        throw UsageError("KS test needs at least one sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        const double f = cdf(samples[i]);
        d = std::max({d, (static_cast<double>(i) + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return {d, ks_p_value(d, n)};
}

inline KsResult ks_test_normal(std::vector<double> samples)
{
    return ks_test(std::move(samples), normal_cdf);
}

/// Two-sample KS test.
inline KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw UsageError("two-sample KS test needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size())
    {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v)
            ++i;
        while (j < b.size() && b[j] <= v)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return {d, ks_p_value(d, na * nb / (na + nb))};
}

/// Upper-tail p-value of a chi-squared statistic.
inline double chi_squared_p_value(double statistic, double dof)
{
    if (!(dof > 0))
        throw UsageError("chi-squared needs positive degrees of freedom");
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

/// Composite Simpson rule on [a, b] with `intervals` (rounded up to even).
template<class F>
double simpson(F&& f, double a, double b, int intervals)
{
    if (intervals % 2)
        ++intervals;
    const double h = (b - a) / intervals;
    double odd = 0, even = 0;
    for (int i = 1; i < intervals; ++i)
        (i % 2 ? odd : even) += f(a + i * h);
    return h / 3 * (f(a) + f(b) + 4 * odd + 2 * even);
}

}  // namespace rle::stats
