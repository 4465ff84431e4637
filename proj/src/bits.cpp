#include "rsolve/bits.hpp"

#include <cmath>

namespace rsolve {

GuardError::GuardError(const std::string& what, int dimension, int guard)
    : Error(what + ": dimension " + std::to_string(dimension) + " exceeds guard " +
            std::to_string(guard)),
      dimension_(dimension),
      guard_(guard)
{
}

void check_guard(int dimension, int guard, const char* what)
{
    if (dimension > guard) throw GuardError(what, dimension, guard);
}

BitVector::BitVector(int size, std::uint64_t mask) : size_(size), mask_(mask)
{
    if (size < 0 || size > kMaxDimension)
        throw std::invalid_argument("BitVector: size out of range");
    if ((mask & ~low_mask(size)) != 0)
        throw std::invalid_argument("BitVector: mask has bits beyond size");
}

BitVector BitVector::from_bits(std::span<const int> bits)
{
    if (bits.size() > static_cast<std::size_t>(kMaxDimension))
        throw std::invalid_argument("BitVector: too many bits");
    std::uint64_t mask = 0;
    for (std::size_t j = 0; j < bits.size(); ++j) {
        if (bits[j] != 0 && bits[j] != 1)
            throw std::invalid_argument("BitVector: entries must be 0 or 1");
        if (bits[j]) mask |= std::uint64_t{1} << j;
    }
    return BitVector(static_cast<int>(bits.size()), mask);
}

void BitVector::set(int position, bool value)
{
    if (position < 0 || position >= size_)
        throw std::out_of_range("BitVector::set: position out of range");
    if (value)
        mask_ |= std::uint64_t{1} << position;
    else
        mask_ &= ~(std::uint64_t{1} << position);
}

std::vector<int> BitVector::to_vector() const
{
    std::vector<int> out(size_);
    for (int j = 0; j < size_; ++j) out[j] = (*this)[j] ? 1 : 0;
    return out;
}

std::string BitVector::to_string() const
{
    std::string out(size_, '0');
    for (int j = 0; j < size_; ++j)
        if ((*this)[j]) out[j] = '1';
    return out;
}

void validate_key(SubInstanceKey key, int n)
{
    if (key.free_count < 0 || key.free_count > n)
        throw std::invalid_argument("key: free count out of range");
    if ((key.suffix & ~low_mask(n)) != 0)
        throw std::invalid_argument("key: suffix has bits beyond dimension");
    if ((key.suffix & low_mask(key.free_count)) != 0)
        throw std::invalid_argument("key: free prefix must be zero");
}

void CompensatedSum::add(double value)
{
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value))
        compensation_ += (sum_ - t) + value;
    else
        compensation_ += (value - t) + sum_;
    sum_ = t;
}

}  // namespace rsolve
