#pragma once

#include <cmath>
#include <span>

namespace sqmod {

/// Neumaier variant of Kahan summation. Order-sensitive: feeding the same
/// terms in the same order always yields the same bits.
class KahanSum {
public:
    KahanSum() = default;
    explicit KahanSum(double init) : sum_(init) {}

    void add(double term) noexcept {
        const double t = sum_ + term;
        if (std::fabs(sum_) >= std::fabs(term))
            comp_ += (sum_ - t) + term;
        else
            comp_ += (term - t) + sum_;
        sum_ = t;
    }

    KahanSum& operator+=(double term) noexcept {
        add(term);
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double kahan_total(std::span<const double> terms) noexcept {
    KahanSum acc;
    for (double v : terms) acc.add(v);
    return acc.value();
}

}  // namespace sqmod
