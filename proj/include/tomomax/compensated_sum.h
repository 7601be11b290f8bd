#pragma once

#include <cmath>

namespace tomomax {

/// Neumaier-compensated accumulator. Infinite terms propagate as in plain summation.
class CompensatedSum {
   public:
    CompensatedSum() = default;
    explicit CompensatedSum(double initial) : sum_(initial) {
    }

    CompensatedSum &operator+=(double x) {
        double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    CompensatedSum &operator+=(const CompensatedSum &other) {
        *this += other.sum_;
        *this += other.carry_;
        return *this;
    }

    double value() const {
        // inf - inf in the carry would otherwise turn an infinite sum into NaN.
        if (std::isinf(sum_)) {
            return sum_;
        }
        return sum_ + carry_;
    }

   private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

}  // namespace tomomax
