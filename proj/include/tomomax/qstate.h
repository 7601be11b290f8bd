#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tomomax/common.h"

namespace tomomax {

/// State spaces handled by the library. `Coin` is the one-parameter classical
/// two-outcome model, embedded as a 1-component Bloch vector r = (2p - 1): its
/// density matrix diag(p, 1-p) commutes with everything, so every quantum formula
/// below reduces to the classical one.
enum class StateKind { Coin, Rebit, Qubit };

int dimension(StateKind kind);
std::string_view kind_name(StateKind kind);
StateKind kind_from_name(std::string_view name);

/// A physical two-level state given by its Bloch vector. Components beyond
/// dimension(kind) are zero. Construction rejects |r| > 1 + kPhysSlack and clamps
/// |r| to 1 inside the slack.
class BlochState {
   public:
    BlochState(StateKind kind, std::span<const double> r);
    BlochState(StateKind kind, const Vec3 &r);

    static BlochState maximally_mixed(StateKind kind);
    /// Coin state with Pr(heads) = p.
    static BlochState coin(double p);

    StateKind kind() const {
        return kind_;
    }
    int dim() const {
        return dimension(kind_);
    }
    const Vec3 &r() const {
        return r_;
    }
    double radius() const {
        return radius_;
    }
    /// Eigenvalues (1 +- |r|)/2.
    double eigenvalue_plus() const {
        return 0.5 * (1.0 + radius_);
    }
    double eigenvalue_minus() const;

    bool operator==(const BlochState &other) const = default;

   private:
    StateKind kind_;
    Vec3 r_{};
    double radius_ = 0.0;
};

/// A linear-inversion estimate that left the state space. It carries no entropy
/// semantics.
struct UnphysicalPoint {
    StateKind kind;
    Vec3 r;
    double radius() const {
        return norm(r);
    }
};

/// Throws UnphysicalArgument unless |r| <= 1 + kPhysSlack.
void check_physical(StateKind kind, const Vec3 &r);

/// Quantum relative entropy D(rho || sigma) in nats; +inf when sigma is rank
/// deficient on the support of rho.
double relative_entropy(const BlochState &rho, const BlochState &sigma);

/// Von Neumann entropy in nats.
double entropy(const BlochState &rho);

/// Binary entropy of the spectrum {(1+a)/2, (1-a)/2}, 0 <= a <= 1.
double spectrum_entropy(double radius);

/// det(rho) = (1 - |r|^2) / 4.
double determinant(const BlochState &rho);

/// Draws `count` states from the Hilbert-Schmidt measure: uniform in the Bloch
/// ball (qubit), disk (rebit) or segment (coin). Deterministic in `seed`.
std::vector<BlochState> sample_hs_uniform(StateKind kind, std::size_t count, std::uint64_t seed);

/// Projects r onto the unit ball in the state's dimension (zeroing unused components).
Vec3 project_to_ball(StateKind kind, const Vec3 &r);

/// Polar parametrization of the state space: coin (z), rebit (t, theta),
/// qubit (t, theta, phi) with t the radius and theta the polar angle. The radius
/// (coin: z) is clamped to the state space.
Vec3 from_polar(StateKind kind, const Vec3 &params);
Vec3 to_polar(StateKind kind, const Vec3 &r);

}  // namespace tomomax
