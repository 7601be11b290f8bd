#include "tomomax/qstate.h"

#include <algorithm>
#include <numbers>
#include <random>

namespace tomomax {

const char *error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::KindMismatch:
            return "KindMismatch";
        case ErrorCode::UnphysicalArgument:
            return "UnphysicalArgument";
        case ErrorCode::ShapeMismatch:
            return "ShapeMismatch";
        case ErrorCode::DesignMismatch:
            return "DesignMismatch";
        case ErrorCode::CapExceeded:
            return "CapExceeded";
        case ErrorCode::ZeroEvidence:
            return "ZeroEvidence";
        case ErrorCode::NonConvergence:
            return "NonConvergence";
        case ErrorCode::IterationLimit:
            return "IterationLimit";
        case ErrorCode::InnerSolverFailure:
            return "InnerSolverFailure";
        case ErrorCode::InvalidArgument:
            return "InvalidArgument";
        case ErrorCode::Io:
            return "Io";
    }
    return "Unknown";
}

int dimension(StateKind kind) {
    switch (kind) {
        case StateKind::Coin:
            return 1;
        case StateKind::Rebit:
            return 2;
        case StateKind::Qubit:
            return 3;
    }
    return 3;
}

std::string_view kind_name(StateKind kind) {
    switch (kind) {
        case StateKind::Coin:
            return "coin";
        case StateKind::Rebit:
            return "rebit";
        case StateKind::Qubit:
            return "qubit";
    }
    return "qubit";
}

StateKind kind_from_name(std::string_view name) {
    if (name == "coin") {
        return StateKind::Coin;
    }
    if (name == "rebit") {
        return StateKind::Rebit;
    }
    if (name == "qubit") {
        return StateKind::Qubit;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown state kind '" + std::string(name) + "'");
}

void check_physical(StateKind kind, const Vec3 &r) {
    for (int k = dimension(kind); k < 3; k++) {
        if (r[k] != 0.0) {
            throw Error(ErrorCode::ShapeMismatch, "Bloch vector has components beyond the state dimension");
        }
    }
    double radius = norm(r);
    if (!(radius <= 1.0 + kPhysSlack)) {
        throw Error(ErrorCode::UnphysicalArgument, "Bloch vector length " + std::to_string(radius) + " exceeds 1");
    }
}

BlochState::BlochState(StateKind kind, const Vec3 &r) : kind_(kind), r_(r) {
    check_physical(kind, r);
    radius_ = norm(r_);
    if (radius_ > 1.0) {
        r_ = (1.0 / radius_) * r_;
        radius_ = 1.0;
    }
}

static Vec3 to_vec3(StateKind kind, std::span<const double> r) {
    if (static_cast<int>(r.size()) != dimension(kind)) {
        throw Error(
            ErrorCode::ShapeMismatch,
            "expected " + std::to_string(dimension(kind)) + " Bloch components, got " + std::to_string(r.size()));
    }
    Vec3 v{};
    std::copy(r.begin(), r.end(), v.begin());
    return v;
}

BlochState::BlochState(StateKind kind, std::span<const double> r) : BlochState(kind, to_vec3(kind, r)) {
}

BlochState BlochState::maximally_mixed(StateKind kind) {
    return BlochState(kind, Vec3{0, 0, 0});
}

BlochState BlochState::coin(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::UnphysicalArgument, "coin bias outside [0, 1]");
    }
    return BlochState(StateKind::Coin, Vec3{2.0 * p - 1.0, 0, 0});
}

double BlochState::eigenvalue_minus() const {
    return std::max(0.0, 0.5 * (1.0 - radius_));
}

static double xlogx(double x) {
    return x > 0.0 ? x * std::log(x) : 0.0;
}

double spectrum_entropy(double radius) {
    double lp = 0.5 * (1.0 + radius);
    double lm = std::max(0.0, 0.5 * (1.0 - radius));
    return -xlogx(lp) - xlogx(lm);
}

double entropy(const BlochState &rho) {
    return spectrum_entropy(rho.radius());
}

double relative_entropy(const BlochState &rho, const BlochState &sigma) {
    if (rho.kind() != sigma.kind()) {
        throw Error(ErrorCode::KindMismatch, "relative entropy between different state kinds");
    }
    double neg_entropy = -entropy(rho);
    double b = sigma.radius();
    if (b == 0.0) {
        return std::max(0.0, neg_entropy + std::numbers::ln2);
    }
    // Expand rho in sigma's eigenbasis: overlaps (1 +- r_rho . b_hat)/2.
    double proj = dot(rho.r(), sigma.r()) / b;
    proj = std::clamp(proj, -1.0, 1.0);
    double ov_plus = 0.5 * (1.0 + proj);
    double ov_minus = 0.5 * (1.0 - proj);
    double mu_plus = sigma.eigenvalue_plus();
    double mu_minus = sigma.eigenvalue_minus();
    double cross = -ov_plus * std::log(mu_plus);
    if (mu_minus == 0.0) {
        if (ov_minus > 1e-14) {
            return kInf;
        }
    } else {
        cross -= ov_minus * std::log(mu_minus);
    }
    return std::max(0.0, neg_entropy + cross);
}

double determinant(const BlochState &rho) {
    double s = dot(rho.r(), rho.r());
    return std::max(0.0, 0.25 * (1.0 - s));
}

Vec3 project_to_ball(StateKind kind, const Vec3 &r) {
    Vec3 v{};
    for (int k = 0; k < dimension(kind); k++) {
        v[k] = r[k];
    }
    double n = norm(v);
    if (n > 1.0) {
        v = (1.0 / n) * v;
    }
    return v;
}

std::vector<BlochState> sample_hs_uniform(StateKind kind, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int d = dimension(kind);
    std::vector<BlochState> out;
    out.reserve(count);
    while (out.size() < count) {
        Vec3 dir{};
        double n = 0.0;
        while (n < 1e-8) {
            for (int k = 0; k < d; k++) {
                dir[k] = gauss(rng);
            }
            n = norm(dir);
        }
        double radius = std::pow(unit(rng), 1.0 / d);
        out.emplace_back(kind, (radius / n) * dir);
    }
    return out;
}

Vec3 from_polar(StateKind kind, const Vec3 &p) {
    switch (kind) {
        case StateKind::Coin:
            return {std::clamp(p[0], -1.0, 1.0), 0, 0};
        case StateKind::Rebit: {
            double t = std::clamp(p[0], 0.0, 1.0);
            return {t * std::cos(p[1]), t * std::sin(p[1]), 0};
        }
        case StateKind::Qubit: {
            double t = std::clamp(p[0], 0.0, 1.0);
            return {t * std::sin(p[1]) * std::cos(p[2]), t * std::sin(p[1]) * std::sin(p[2]), t * std::cos(p[1])};
        }
    }
    return {};
}

Vec3 to_polar(StateKind kind, const Vec3 &r) {
    switch (kind) {
        case StateKind::Coin:
            return {r[0], 0, 0};
        case StateKind::Rebit:
            return {std::hypot(r[0], r[1]), std::atan2(r[1], r[0]), 0};
        case StateKind::Qubit: {
            double t = norm(r);
            double theta = t > 0.0 ? std::acos(std::clamp(r[2] / t, -1.0, 1.0)) : 0.0;
            return {t, theta, std::atan2(r[1], r[0])};
        }
    }
    return {};
}

}  // namespace tomomax
