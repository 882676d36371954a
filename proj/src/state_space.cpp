#include "cdiff/state_space.hpp"

#include <limits>
#include <string>

#include "cdiff/error.hpp"

namespace cdiff {

StateSpace::StateSpace(int dims, int vocab, bool ordinal)
    : dims_(dims), vocab_(vocab), ordinal_(ordinal) {
  if (dims < 1) throw DomainError("state space needs dims >= 1, got " + std::to_string(dims));
  if (vocab < 2) throw DomainError("state space needs vocab >= 2, got " + std::to_string(vocab));
}

std::uint64_t StateSpace::state_count() const {
  std::uint64_t n = 1;
  for (int d = 0; d < dims_; ++d) {
    if (n > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(vocab_))
      return std::numeric_limits<std::uint64_t>::max();
    n *= static_cast<std::uint64_t>(vocab_);
  }
  return n;
}

void StateSpace::require_enumerable() const {
  if (!enumerable())
    throw CapacityError("state space " + std::to_string(vocab_) + "^" + std::to_string(dims_) +
                        " exceeds the 2^24 enumeration limit");
}

bool StateSpace::contains(const State& x) const {
  if (static_cast<int>(x.size()) != dims_) return false;
  for (int v : x)
    if (v < 0 || v >= vocab_) return false;
  return true;
}

void StateSpace::validate(const State& x) const {
  if (static_cast<int>(x.size()) != dims_)
    throw DomainError("state has " + std::to_string(x.size()) + " entries, space has " +
                      std::to_string(dims_) + " dims");
  for (int v : x)
    if (v < 0 || v >= vocab_)
      throw DomainError("state entry " + std::to_string(v) + " outside [0, " +
                        std::to_string(vocab_) + ")");
}

std::uint64_t StateSpace::index(const State& x) const {
  std::uint64_t idx = 0;
  for (int d = 0; d < dims_; ++d) idx = idx * static_cast<std::uint64_t>(vocab_) + static_cast<std::uint64_t>(x[d]);
  return idx;
}

State StateSpace::state_at(std::uint64_t index) const {
  State x(dims_);
  for (int d = dims_ - 1; d >= 0; --d) {
    x[d] = static_cast<int>(index % static_cast<std::uint64_t>(vocab_));
    index /= static_cast<std::uint64_t>(vocab_);
  }
  return x;
}

std::uint64_t StateSpace::stride(int d) const {
  std::uint64_t s = 1;
  for (int e = dims_ - 1; e > d; --e) s *= static_cast<std::uint64_t>(vocab_);
  return s;
}

int hamming(const State& a, const State& b) {
  if (a.size() != b.size()) throw DomainError("hamming: length mismatch");
  int h = 0;
  for (std::size_t i = 0; i < a.size(); ++i) h += a[i] != b[i];
  return h;
}

std::vector<int> gray_encode(std::uint64_t n, int bits) {
  if (bits < 1 || bits > 63) throw DomainError("gray_encode: bits must be in [1, 63]");
  if (n >= (std::uint64_t{1} << bits))
    throw DomainError("gray_encode: " + std::to_string(n) + " does not fit in " +
                      std::to_string(bits) + " bits");
  const std::uint64_t g = n ^ (n >> 1);
  std::vector<int> out(bits);
  for (int i = 0; i < bits; ++i) out[i] = static_cast<int>((g >> (bits - 1 - i)) & 1U);
  return out;
}

std::uint64_t gray_decode(std::span<const int> bits) {
  if (bits.empty()) throw DomainError("gray_decode: empty bit vector");
  if (bits.size() > 63) throw DomainError("gray_decode: more than 63 bits");
  // Binary bit i is the XOR of all Gray bits up to i.
  std::uint64_t n = 0;
  int acc = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) throw DomainError("gray_decode: entries must be 0 or 1");
    acc ^= b;
    n = (n << 1) | static_cast<std::uint64_t>(acc);
  }
  return n;
}

}  // namespace cdiff
