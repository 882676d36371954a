#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cdiff {

// One configuration of a product categorical space: values[d] in [0, vocab).
using State = std::vector<int>;

// Largest state count the enumerating oracles accept.
inline constexpr std::uint64_t kMaxEnumerableStates = std::uint64_t{1} << 24;

class StateSpace {
 public:
  StateSpace() = default;
  StateSpace(int dims, int vocab, bool ordinal = false);

  int dims() const { return dims_; }
  int vocab() const { return vocab_; }
  bool ordinal() const { return ordinal_; }

  // C^D, saturating at UINT64_MAX.
  std::uint64_t state_count() const;
  bool enumerable() const { return state_count() <= kMaxEnumerableStates; }
  // Throws CapacityError unless enumerable().
  void require_enumerable() const;

  bool contains(const State& x) const;
  void validate(const State& x) const;

  // Lexicographic index, first dimension most significant.
  std::uint64_t index(const State& x) const;
  State state_at(std::uint64_t index) const;
  // Stride of dimension d in the lexicographic index.
  std::uint64_t stride(int d) const;

  bool operator==(const StateSpace&) const = default;

 private:
  int dims_ = 1;
  int vocab_ = 2;
  bool ordinal_ = false;
};

int hamming(const State& a, const State& b);

// Binary-reflected Gray code, most significant bit first.
std::vector<int> gray_encode(std::uint64_t n, int bits);
std::uint64_t gray_decode(std::span<const int> bits);

}  // namespace cdiff
