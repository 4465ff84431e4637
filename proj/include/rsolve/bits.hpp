#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsolve {

// Position j (0-based) in every mask corresponds to decision variable x_{j+1}.
inline constexpr int kMaxDimension = 62;

// Guards for exhaustive procedures.
inline constexpr int kEnumerationGuard = 24;  // key listing, brute force
inline constexpr int kTableGuard = 20;        // oracle tables, exact Psi/Phi
inline constexpr int kAlphaGuard = 16;        // MWIS sub-graph recursion
inline constexpr int kUnmemoizedGuard = 8;    // exponential tree expansion

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An exhaustive procedure was asked to run on a dimension above its guard.
class GuardError : public Error {
public:
    GuardError(const std::string& what, int dimension, int guard);
    int dimension() const { return dimension_; }
    int guard() const { return guard_; }

private:
    int dimension_;
    int guard_;
};

/// An assignment or key violates the instance's feasibility predicate.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// A computation produced NaN or infinity.
class NumericError : public Error {
public:
    using Error::Error;
};

void check_guard(int dimension, int guard, const char* what);

/// Fixed-length vector of bits, stored as a mask.
class BitVector {
public:
    BitVector() = default;
    BitVector(int size, std::uint64_t mask);

    static BitVector from_bits(std::span<const int> bits);

    int size() const { return size_; }
    std::uint64_t mask() const { return mask_; }
    bool operator[](int position) const { return (mask_ >> position) & 1u; }
    void set(int position, bool value);

    std::vector<int> to_vector() const;
    std::string to_string() const;

    friend bool operator==(const BitVector&, const BitVector&) = default;

private:
    int size_ = 0;
    std::uint64_t mask_ = 0;
};

/// Sub-instance with the first `free_count` variables free and the remaining
/// ones fixed to the bits of `suffix`. Bits below `free_count` are zero.
struct SubInstanceKey {
    int free_count = 0;
    std::uint64_t suffix = 0;

    friend bool operator==(const SubInstanceKey&, const SubInstanceKey&) = default;
};

inline SubInstanceKey root_key(int dimension) { return {dimension, 0}; }

/// Throws std::invalid_argument unless the key is well formed for dimension n.
void validate_key(SubInstanceKey key, int n);

inline std::uint64_t low_mask(int count)
{
    return count >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << count) - 1;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double value);
    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// True when lhs <= rhs up to a relative slack of rel * (1 + |rhs|).
inline bool within_bound(double lhs, double rhs, double rel = 1e-9)
{
    return lhs <= rhs + rel * (1.0 + (rhs < 0 ? -rhs : rhs));
}

}  // namespace rsolve
