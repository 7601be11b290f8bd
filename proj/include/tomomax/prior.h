#pragma once

#include <vector>

#include "tomomax/qstate.h"

namespace tomomax {

/// Finitely supported prior over states (a candidate least favorable prior).
class DiscretePrior {
   public:
    /// Validates: same kind everywhere, nonnegative weights summing to 1 +- 1e-12,
    /// no two supports within 1e-10.
    DiscretePrior(std::vector<BlochState> supports, std::vector<double> weights);

    /// Normalizes the weights and merges supports closer than `merge_distance`
    /// (weights summed, location of the heavier one kept).
    static DiscretePrior normalized(
        std::vector<BlochState> supports, std::vector<double> weights, double merge_distance = 1e-10);
    static DiscretePrior uniform(std::vector<BlochState> supports, double merge_distance = 1e-10);
    static DiscretePrior point(const BlochState &state);

    StateKind kind() const {
        return supports_.front().kind();
    }
    std::size_t size() const {
        return supports_.size();
    }
    const std::vector<BlochState> &supports() const {
        return supports_;
    }
    const std::vector<double> &weights() const {
        return weights_;
    }
    const BlochState &support(std::size_t i) const {
        return supports_[i];
    }
    double weight(std::size_t i) const {
        return weights_[i];
    }

    /// Supports whose weight is at least `threshold`, renormalized.
    DiscretePrior pruned(double threshold) const;
    /// Convex combination t*this + (1-t)*other over the union of supports.
    DiscretePrior mixture(const DiscretePrior &other, double t) const;

   private:
    std::vector<BlochState> supports_;
    std::vector<double> weights_;
};

}  // namespace tomomax
