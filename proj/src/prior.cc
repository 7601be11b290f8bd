#include "tomomax/prior.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tomomax {

DiscretePrior::DiscretePrior(std::vector<BlochState> supports, std::vector<double> weights)
    : supports_(std::move(supports)), weights_(std::move(weights)) {
    if (supports_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "prior needs at least one support");
    }
    if (supports_.size() != weights_.size()) {
        throw Error(ErrorCode::ShapeMismatch, "prior supports and weights differ in length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < weights_.size(); i++) {
        if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
            throw Error(ErrorCode::InvalidArgument, "prior weights must be finite and nonnegative");
        }
        if (supports_[i].kind() != supports_[0].kind()) {
            throw Error(ErrorCode::KindMismatch, "prior mixes state kinds");
        }
        total += weights_[i];
    }
    if (std::fabs(total - 1.0) > 1e-12) {
        throw Error(ErrorCode::InvalidArgument, "prior weights sum to " + std::to_string(total));
    }
    for (std::size_t i = 0; i < supports_.size(); i++) {
        for (std::size_t j = i + 1; j < supports_.size(); j++) {
            if (distance(supports_[i].r(), supports_[j].r()) <= 1e-10) {
                throw Error(ErrorCode::InvalidArgument, "prior has duplicate supports");
            }
        }
    }
}

DiscretePrior DiscretePrior::normalized(
    std::vector<BlochState> supports, std::vector<double> weights, double merge_distance) {
    if (supports.size() != weights.size()) {
        throw Error(ErrorCode::ShapeMismatch, "prior supports and weights differ in length");
    }
    std::vector<BlochState> kept;
    std::vector<double> kept_w;
    for (std::size_t i = 0; i < supports.size(); i++) {
        double w = std::max(0.0, weights[i]);
        bool merged = false;
        for (std::size_t j = 0; j < kept.size(); j++) {
            if (distance(kept[j].r(), supports[i].r()) <= std::max(merge_distance, 1e-10)) {
                if (w > kept_w[j]) {
                    kept[j] = supports[i];
                }
                kept_w[j] += w;
                merged = true;
                break;
            }
        }
        if (!merged) {
            kept.push_back(supports[i]);
            kept_w.push_back(w);
        }
    }
    double total = std::accumulate(kept_w.begin(), kept_w.end(), 0.0);
    if (!(total > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "prior weights sum to zero");
    }
    for (double &w : kept_w) {
        w /= total;
    }
    return DiscretePrior(std::move(kept), std::move(kept_w));
}

DiscretePrior DiscretePrior::uniform(std::vector<BlochState> supports, double merge_distance) {
    std::vector<double> w(supports.size(), 1.0);
    return normalized(std::move(supports), std::move(w), merge_distance);
}

DiscretePrior DiscretePrior::point(const BlochState &state) {
    return DiscretePrior({state}, {1.0});
}

DiscretePrior DiscretePrior::pruned(double threshold) const {
    std::vector<BlochState> s;
    std::vector<double> w;
    for (std::size_t i = 0; i < size(); i++) {
        if (weights_[i] >= threshold) {
            s.push_back(supports_[i]);
            w.push_back(weights_[i]);
        }
    }
    if (s.empty()) {
        std::size_t best = static_cast<std::size_t>(
            std::max_element(weights_.begin(), weights_.end()) - weights_.begin());
        return point(supports_[best]);
    }
    return normalized(std::move(s), std::move(w));
}

DiscretePrior DiscretePrior::mixture(const DiscretePrior &other, double t) const {
    std::vector<BlochState> s = supports_;
    std::vector<double> w;
    for (double x : weights_) {
        w.push_back(t * x);
    }
    for (std::size_t i = 0; i < other.size(); i++) {
        s.push_back(other.support(i));
        w.push_back((1.0 - t) * other.weight(i));
    }
    return normalized(std::move(s), std::move(w));
}

}  // namespace tomomax
