#pragma once

#include <cstdint>
#include <iterator>
#include <vector>

#include "tomomax/common.h"
#include "tomomax/qstate.h"

namespace tomomax {

/// Which two-outcome measurements are made and how many shots each gets.
///
/// Quantum designs (rebit, qubit) measure along unit Bloch axes; outcome "+"
/// has probability (1 + axis . r)/2. Coin designs use a 1-component axis whose
/// length is the visibility 1 - 2*alpha of a noisy coin flip, so the same
/// formula gives q = alpha + p(1 - 2 alpha).
class ExperimentDesign {
   public:
    ExperimentDesign(StateKind kind, std::vector<Vec3> axes, std::vector<int> shots);

    /// Default Pauli designs: rebit {X, Y}, qubit {X, Y, Z}, coin {noiseless}.
    static ExperimentDesign pauli(StateKind kind, int shots_per_basis);
    /// Pauli design with `total_shots` split evenly; throws InvalidArgument when
    /// the total is not divisible by the number of bases.
    static ExperimentDesign pauli_total(StateKind kind, int total_shots);

    StateKind kind() const {
        return kind_;
    }
    std::size_t num_bases() const {
        return axes_.size();
    }
    const Vec3 &axis(std::size_t b) const {
        return axes_[b];
    }
    const std::vector<Vec3> &axes() const {
        return axes_;
    }
    int shots(std::size_t b) const {
        return shots_[b];
    }
    const std::vector<int> &shots() const {
        return shots_;
    }
    int total_shots() const;
    bool uniform_shots() const;
    /// Number of datasets, saturating at UINT64_MAX.
    std::uint64_t dataset_count() const;
    /// True when the axes are pairwise orthogonal unit vectors.
    bool orthonormal_axes() const;

    bool operator==(const ExperimentDesign &other) const = default;

   private:
    StateKind kind_;
    std::vector<Vec3> axes_;
    std::vector<int> shots_;
};

/// Outcome counts: n_b = number of "+" outcomes in basis b.
struct Dataset {
    std::vector<int> counts;
    bool operator==(const Dataset &other) const = default;
};

void check_dataset(const ExperimentDesign &design, const Dataset &dataset);
/// Lexicographic index (last basis varies fastest).
std::uint64_t dataset_index(const ExperimentDesign &design, const Dataset &dataset);
Dataset dataset_at(const ExperimentDesign &design, std::uint64_t index);

/// Forward range over all datasets of a design in lexicographic order. Copies
/// iterate independently.
class DatasetRange {
   public:
    class iterator {
       public:
        using iterator_category = std::forward_iterator_tag;
        using value_type = Dataset;
        using difference_type = std::ptrdiff_t;
        using pointer = const Dataset *;
        using reference = const Dataset &;

        iterator() = default;
        const Dataset &operator*() const {
            return current_;
        }
        const Dataset *operator->() const {
            return &current_;
        }
        iterator &operator++();
        iterator operator++(int) {
            iterator copy = *this;
            ++*this;
            return copy;
        }
        bool operator==(const iterator &other) const {
            return index_ == other.index_;
        }

       private:
        friend class DatasetRange;
        const std::vector<int> *limits_ = nullptr;
        Dataset current_;
        std::uint64_t index_ = 0;
    };

    iterator begin() const;
    iterator end() const;
    std::uint64_t size() const {
        return count_;
    }

   private:
    friend DatasetRange enumerate_datasets(const ExperimentDesign &, std::uint64_t);
    std::vector<int> limits_;
    std::uint64_t count_ = 0;
};

/// Throws CapExceeded (message carries the required count) when the design has
/// more than `cap` datasets.
DatasetRange enumerate_datasets(const ExperimentDesign &design, std::uint64_t cap = kDefaultDatasetCap);

/// q = (1 + axis . r)/2.
double outcome_probability(const ExperimentDesign &design, const Vec3 &basis_axis, const BlochState &rho);

/// Product of binomials over bases, binomial coefficients included.
double likelihood(const ExperimentDesign &design, const Dataset &dataset, const BlochState &rho);
double log_likelihood(const ExperimentDesign &design, const Dataset &dataset, const BlochState &rho);

/// Probability that measuring `basis_axis` on the |0> eigenstate of
/// `eigenbasis_axis` gives the minority outcome: (1 - a . e)/2.
double effective_noise(const Vec3 &basis_axis, const Vec3 &eigenbasis_axis);

/// (1 - 2 alpha)^2 / (alpha (1 - alpha)); +inf at alpha in {0, 1}.
double resolution(double alpha);

/// Shot-weighted average of resolution(effective_noise(axis_b, eigenbasis_axis)).
double mean_resolution(const ExperimentDesign &design, const Vec3 &eigenbasis_axis);

/// Precomputed indexing and binomial tables for dense per-dataset loops.
class DatasetLayout {
   public:
    explicit DatasetLayout(const ExperimentDesign &design, std::uint64_t cap = kDefaultDatasetCap);

    const ExperimentDesign &design() const {
        return design_;
    }
    std::size_t num_bases() const {
        return shots_.size();
    }
    std::size_t num_datasets() const {
        return num_datasets_;
    }
    /// Length of the concatenated per-basis pmf buffer: sum_b (M_b + 1).
    std::size_t pmf_size() const {
        return pmf_size_;
    }
    std::size_t pmf_offset(std::size_t b) const {
        return offsets_[b];
    }
    int shots(std::size_t b) const {
        return shots_[b];
    }

    /// Per-basis outcome probabilities q_b for the Bloch vector r.
    double outcome_q(std::size_t b, const Vec3 &r) const;
    /// Binomial pmfs of every basis, concatenated; exact zeros when q is 0 or 1.
    void fill_pmfs(const Vec3 &r, double *out) const;
    /// Same as fill_pmfs in log space (-inf for impossible counts).
    void fill_log_pmfs(const Vec3 &r, double *out) const;

    /// Calls fn(index, weight) for every dataset with weight = prod_b pmf_b[n_b].
    template <class Fn>
    void for_each_weight(const double *pmfs, Fn &&fn) const;

    /// Calls fn(index, log_weight) with log_weight = sum_b log_pmf_b[n_b].
    template <class Fn>
    void for_each_log_weight(const double *log_pmfs, Fn &&fn) const;

   private:
    ExperimentDesign design_;
    std::vector<int> shots_;
    std::vector<std::size_t> offsets_;
    std::vector<double> log_choose_;
    std::size_t pmf_size_ = 0;
    std::size_t num_datasets_ = 0;
};

template <class Fn>
void DatasetLayout::for_each_weight(const double *pmfs, Fn &&fn) const {
    const std::size_t nb = shots_.size();
    const double *last = pmfs + offsets_[nb - 1];
    const int m_last = shots_[nb - 1];
    if (nb == 1) {
        for (int n = 0; n <= m_last; n++) {
            fn(static_cast<std::size_t>(n), last[n]);
        }
        return;
    }
    std::vector<int> counts(nb - 1, 0);
    std::vector<double> prefix(nb, 1.0);
    for (std::size_t b = 0; b + 1 < nb; b++) {
        prefix[b + 1] = prefix[b] * pmfs[offsets_[b]];
    }
    std::size_t index = 0;
    while (true) {
        double w = prefix[nb - 1];
        for (int n = 0; n <= m_last; n++) {
            fn(index++, w * last[n]);
        }
        std::size_t b = nb - 1;
        while (b > 0) {
            b--;
            if (++counts[b] <= shots_[b]) {
                break;
            }
            counts[b] = 0;
            if (b == 0) {
                return;
            }
        }
        for (std::size_t c = b; c + 1 < nb; c++) {
            prefix[c + 1] = prefix[c] * pmfs[offsets_[c] + counts[c]];
        }
    }
}

template <class Fn>
void DatasetLayout::for_each_log_weight(const double *log_pmfs, Fn &&fn) const {
    const std::size_t nb = shots_.size();
    const double *last = log_pmfs + offsets_[nb - 1];
    const int m_last = shots_[nb - 1];
    if (nb == 1) {
        for (int n = 0; n <= m_last; n++) {
            fn(static_cast<std::size_t>(n), last[n]);
        }
        return;
    }
    std::vector<int> counts(nb - 1, 0);
    std::vector<double> prefix(nb, 0.0);
    for (std::size_t b = 0; b + 1 < nb; b++) {
        prefix[b + 1] = prefix[b] + log_pmfs[offsets_[b]];
    }
    std::size_t index = 0;
    while (true) {
        double w = prefix[nb - 1];
        for (int n = 0; n <= m_last; n++) {
            fn(index++, w + last[n]);
        }
        std::size_t b = nb - 1;
        while (b > 0) {
            b--;
            if (++counts[b] <= shots_[b]) {
                break;
            }
            counts[b] = 0;
            if (b == 0) {
                return;
            }
        }
        for (std::size_t c = b; c + 1 < nb; c++) {
            prefix[c + 1] = prefix[c] + log_pmfs[offsets_[c] + counts[c]];
        }
    }
}

}  // namespace tomomax
