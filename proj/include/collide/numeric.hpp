#pragma once

#include <algorithm>
#include <cmath>
#include <span>

namespace collide::numeric {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

/// log(1 + sum_a (e^{x_a} - 1)) for x_a >= 0, without overflow for large x_a
/// and without cancellation for small x_a.
inline double log1p_sum_expm1(std::span<const double> xs) noexcept {
    double peak = 0.0;
    for (double x : xs) peak = std::max(peak, x);
    if (peak < 1.0) {
        CompensatedSum s;
        for (double x : xs) s.add(std::expm1(x));
        return std::log1p(s.value());
    }
    // 1 - q + sum e^{x_a} = e^{peak} (sum e^{x_a - peak} - (q - 1) e^{-peak})
    CompensatedSum s;
    for (double x : xs) s.add(std::exp(x - peak));
    s.add(-static_cast<double>(xs.size() - 1) * std::exp(-peak));
    return peak + std::log(s.value());
}

}  // namespace collide::numeric
