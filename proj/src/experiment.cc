#include "tomomax/experiment.h"

#include <algorithm>
#include <cmath>

namespace tomomax {

ExperimentDesign::ExperimentDesign(StateKind kind, std::vector<Vec3> axes, std::vector<int> shots)
    : kind_(kind), axes_(std::move(axes)), shots_(std::move(shots)) {
    if (axes_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "design needs at least one basis");
    }
    if (axes_.size() != shots_.size()) {
        throw Error(ErrorCode::ShapeMismatch, "design axes and shot counts differ in length");
    }
    int d = dimension(kind_);
    for (std::size_t b = 0; b < axes_.size(); b++) {
        const Vec3 &a = axes_[b];
        for (int k = d; k < 3; k++) {
            if (a[k] != 0.0) {
                throw Error(ErrorCode::ShapeMismatch, "design axis has components beyond the state dimension");
            }
        }
        double len = norm(a);
        if (kind_ == StateKind::Coin) {
            if (!(len > 0.0 && len <= 1.0 + 1e-12)) {
                throw Error(ErrorCode::InvalidArgument, "coin visibility must lie in (0, 1]");
            }
        } else if (std::fabs(len - 1.0) > 1e-12) {
            throw Error(ErrorCode::InvalidArgument, "measurement axes must be unit vectors");
        }
        if (shots_[b] < 1) {
            throw Error(ErrorCode::InvalidArgument, "each basis needs at least one shot");
        }
    }
}

ExperimentDesign ExperimentDesign::pauli(StateKind kind, int shots_per_basis) {
    switch (kind) {
        case StateKind::Coin:
            return ExperimentDesign(kind, {Vec3{1, 0, 0}}, {shots_per_basis});
        case StateKind::Rebit:
            return ExperimentDesign(kind, {Vec3{1, 0, 0}, Vec3{0, 1, 0}}, {shots_per_basis, shots_per_basis});
        case StateKind::Qubit:
            return ExperimentDesign(
                kind, {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}}, {shots_per_basis, shots_per_basis, shots_per_basis});
    }
    throw Error(ErrorCode::InvalidArgument, "unknown kind");
}

ExperimentDesign ExperimentDesign::pauli_total(StateKind kind, int total_shots) {
    int bases = kind == StateKind::Coin ? 1 : dimension(kind);
    if (total_shots < bases || total_shots % bases != 0) {
        throw Error(
            ErrorCode::InvalidArgument,
            "N=" + std::to_string(total_shots) + " is not a positive multiple of " + std::to_string(bases) +
                " bases");
    }
    return pauli(kind, total_shots / bases);
}

int ExperimentDesign::total_shots() const {
    int total = 0;
    for (int m : shots_) {
        total += m;
    }
    return total;
}

bool ExperimentDesign::uniform_shots() const {
    return std::all_of(shots_.begin(), shots_.end(), [&](int m) { return m == shots_[0]; });
}

std::uint64_t ExperimentDesign::dataset_count() const {
    std::uint64_t count = 1;
    for (int m : shots_) {
        std::uint64_t f = static_cast<std::uint64_t>(m) + 1;
        if (count > UINT64_MAX / f) {
            return UINT64_MAX;
        }
        count *= f;
    }
    return count;
}

bool ExperimentDesign::orthonormal_axes() const {
    for (std::size_t a = 0; a < axes_.size(); a++) {
        if (std::fabs(norm(axes_[a]) - 1.0) > 1e-12) {
            return false;
        }
        for (std::size_t b = a + 1; b < axes_.size(); b++) {
            if (std::fabs(dot(axes_[a], axes_[b])) > 1e-12) {
                return false;
            }
        }
    }
    return true;
}

void check_dataset(const ExperimentDesign &design, const Dataset &dataset) {
    if (dataset.counts.size() != design.num_bases()) {
        throw Error(ErrorCode::ShapeMismatch, "dataset has the wrong number of bases");
    }
    for (std::size_t b = 0; b < design.num_bases(); b++) {
        if (dataset.counts[b] < 0 || dataset.counts[b] > design.shots(b)) {
            throw Error(ErrorCode::ShapeMismatch, "dataset count outside [0, M]");
        }
    }
}

std::uint64_t dataset_index(const ExperimentDesign &design, const Dataset &dataset) {
    check_dataset(design, dataset);
    std::uint64_t index = 0;
    for (std::size_t b = 0; b < design.num_bases(); b++) {
        index = index * static_cast<std::uint64_t>(design.shots(b) + 1) + static_cast<std::uint64_t>(dataset.counts[b]);
    }
    return index;
}

Dataset dataset_at(const ExperimentDesign &design, std::uint64_t index) {
    if (index >= design.dataset_count()) {
        throw Error(ErrorCode::ShapeMismatch, "dataset index out of range");
    }
    Dataset d;
    d.counts.resize(design.num_bases());
    for (std::size_t b = design.num_bases(); b-- > 0;) {
        std::uint64_t radix = static_cast<std::uint64_t>(design.shots(b) + 1);
        d.counts[b] = static_cast<int>(index % radix);
        index /= radix;
    }
    return d;
}

DatasetRange::iterator &DatasetRange::iterator::operator++() {
    index_++;
    auto &counts = current_.counts;
    for (std::size_t b = counts.size(); b-- > 0;) {
        if (++counts[b] <= (*limits_)[b]) {
            return *this;
        }
        counts[b] = 0;
    }
    return *this;
}

DatasetRange::iterator DatasetRange::begin() const {
    iterator it;
    it.limits_ = &limits_;
    it.current_.counts.assign(limits_.size(), 0);
    it.index_ = 0;
    return it;
}

DatasetRange::iterator DatasetRange::end() const {
    iterator it;
    it.limits_ = &limits_;
    it.index_ = count_;
    return it;
}

DatasetRange enumerate_datasets(const ExperimentDesign &design, std::uint64_t cap) {
    std::uint64_t count = design.dataset_count();
    if (count > cap) {
        throw Error(
            ErrorCode::CapExceeded,
            "design requires " + std::to_string(count) + " datasets, cap is " + std::to_string(cap));
    }
    DatasetRange range;
    range.limits_ = design.shots();
    range.count_ = count;
    return range;
}

double outcome_probability(const ExperimentDesign &design, const Vec3 &basis_axis, const BlochState &rho) {
    if (design.kind() != rho.kind()) {
        throw Error(ErrorCode::KindMismatch, "state kind differs from design kind");
    }
    return std::clamp(0.5 * (1.0 + dot(basis_axis, rho.r())), 0.0, 1.0);
}

static double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

static double log_binomial_pmf(double lc, int m, int n, double q) {
    double ll = lc;
    if (n > 0) {
        if (q <= 0.0) {
            return -kInf;
        }
        ll += n * std::log(q);
    }
    if (m - n > 0) {
        if (q >= 1.0) {
            return -kInf;
        }
        ll += (m - n) * std::log1p(-q);
    }
    return ll;
}

double log_likelihood(const ExperimentDesign &design, const Dataset &dataset, const BlochState &rho) {
    check_dataset(design, dataset);
    double total = 0.0;
    for (std::size_t b = 0; b < design.num_bases(); b++) {
        int m = design.shots(b);
        int n = dataset.counts[b];
        double q = outcome_probability(design, design.axis(b), rho);
        total += log_binomial_pmf(log_choose(m, n), m, n, q);
    }
    return total;
}

double likelihood(const ExperimentDesign &design, const Dataset &dataset, const BlochState &rho) {
    return std::exp(log_likelihood(design, dataset, rho));
}

double effective_noise(const Vec3 &basis_axis, const Vec3 &eigenbasis_axis) {
    return std::clamp(0.5 * (1.0 - dot(basis_axis, eigenbasis_axis)), 0.0, 1.0);
}

double resolution(double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0) {
        return kInf;
    }
    double s = 1.0 - 2.0 * alpha;
    return s * s / (alpha * (1.0 - alpha));
}

double mean_resolution(const ExperimentDesign &design, const Vec3 &eigenbasis_axis) {
    double total = 0.0;
    for (std::size_t b = 0; b < design.num_bases(); b++) {
        total += design.shots(b) * resolution(effective_noise(design.axis(b), eigenbasis_axis));
    }
    return total / design.total_shots();
}

DatasetLayout::DatasetLayout(const ExperimentDesign &design, std::uint64_t cap) : design_(design), shots_(design.shots()) {
    std::uint64_t count = design.dataset_count();
    if (count > cap) {
        throw Error(
            ErrorCode::CapExceeded,
            "design requires " + std::to_string(count) + " datasets, cap is " + std::to_string(cap));
    }
    num_datasets_ = static_cast<std::size_t>(count);
    offsets_.resize(shots_.size());
    for (std::size_t b = 0; b < shots_.size(); b++) {
        offsets_[b] = pmf_size_;
        pmf_size_ += static_cast<std::size_t>(shots_[b]) + 1;
    }
    log_choose_.resize(pmf_size_);
    for (std::size_t b = 0; b < shots_.size(); b++) {
        for (int n = 0; n <= shots_[b]; n++) {
            log_choose_[offsets_[b] + n] = log_choose(shots_[b], n);
        }
    }
}

double DatasetLayout::outcome_q(std::size_t b, const Vec3 &r) const {
    return std::clamp(0.5 * (1.0 + dot(design_.axis(b), r)), 0.0, 1.0);
}

void DatasetLayout::fill_log_pmfs(const Vec3 &r, double *out) const {
    for (std::size_t b = 0; b < shots_.size(); b++) {
        int m = shots_[b];
        double q = outcome_q(b, r);
        double *dst = out + offsets_[b];
        const double *lc = log_choose_.data() + offsets_[b];
        if (q <= 0.0 || q >= 1.0) {
            std::fill(dst, dst + m + 1, -kInf);
            dst[q <= 0.0 ? 0 : m] = 0.0;
            continue;
        }
        double lq = std::log(q);
        double lp = std::log1p(-q);
        for (int n = 0; n <= m; n++) {
            dst[n] = lc[n] + n * lq + (m - n) * lp;
        }
    }
}

void DatasetLayout::fill_pmfs(const Vec3 &r, double *out) const {
    fill_log_pmfs(r, out);
    for (std::size_t i = 0; i < pmf_size_; i++) {
        out[i] = std::exp(out[i]);
    }
}

}  // namespace tomomax
