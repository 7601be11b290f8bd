#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace tomomax {

using Vec3 = std::array<double, 3>;

/// Numerical slack on |r| <= 1 for physical Bloch vectors.
inline constexpr double kPhysSlack = 1e-12;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Default cap on the number of datasets an enumeration may produce.
inline constexpr std::uint64_t kDefaultDatasetCap = std::uint64_t{1} << 24;

enum class ErrorCode {
    KindMismatch,
    UnphysicalArgument,
    ShapeMismatch,
    DesignMismatch,
    CapExceeded,
    ZeroEvidence,
    NonConvergence,
    IterationLimit,
    InnerSolverFailure,
    InvalidArgument,
    Io,
};

const char *error_code_name(ErrorCode code);

class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {
    }
    ErrorCode code() const noexcept {
        return code_;
    }

   private:
    ErrorCode code_;
};

inline double dot(const Vec3 &a, const Vec3 &b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Vec3 &a) {
    return std::sqrt(dot(a, a));
}

inline Vec3 operator+(const Vec3 &a, const Vec3 &b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Vec3 operator-(const Vec3 &a, const Vec3 &b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Vec3 operator*(double s, const Vec3 &a) {
    return {s * a[0], s * a[1], s * a[2]};
}

inline double distance(const Vec3 &a, const Vec3 &b) {
    return norm(a - b);
}

}  // namespace tomomax
