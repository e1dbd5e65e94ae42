#include "opsel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace opsel {

double mean(std::span<const double> samples)
{
    if (samples.empty()) throw std::domain_error("mean of empty sample");
    return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

double sample_stddev(std::span<const double> samples)
{
    if (samples.size() < 2) throw std::domain_error("stddev needs at least 2 samples");
    const double m = mean(samples);
    double ss = 0.0;
    for (double x : samples) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(samples.size() - 1));
}

Interval confidence_interval(std::span<const double> samples, double level)
{
    if (samples.size() < 2) throw std::domain_error("confidence interval needs at least 2 samples");
    if (!(level > 0.0 && level < 1.0)) throw std::domain_error("confidence level must be in (0, 1)");

    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*lo == *hi) return {*lo, *lo};

    const double n = static_cast<double>(samples.size());
    const double m = mean(samples);
    const double s = sample_stddev(samples);

    boost::math::students_t dist(n - 1.0);
    const double t = boost::math::quantile(dist, 0.5 + 0.5 * level);
    const double half = t * s / std::sqrt(n);
    return {m - half, m + half};
}

}  // namespace opsel
