#pragma once

#include <span>
#include <stdexcept>

namespace opsel {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double half_width() const { return 0.5 * (hi - lo); }
    double mid() const { return 0.5 * (lo + hi); }
    bool overlaps(const Interval& other) const { return lo <= other.hi && other.lo <= hi; }
};

double mean(std::span<const double> samples);

/// Sample standard deviation (n - 1 denominator). Needs >= 2 samples.
double sample_stddev(std::span<const double> samples);

/// Two-sided Student-t interval mean +- t_{n-1,(1+level)/2} * s / sqrt(n).
/// Throws std::domain_error for fewer than 2 samples or level outside (0, 1).
Interval confidence_interval(std::span<const double> samples, double level = 0.90);

}  // namespace opsel
