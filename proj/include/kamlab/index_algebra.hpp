#pragma once

// Sparse exponent vectors over integer Fourier modes, the conservation
// functionals (mass, momentum, quadratic moment) and the admissibility
// predicate that every Hamiltonian monomial must satisfy.

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kamlab {

using Mode = int;

/// Finite window [-M, M] of Fourier modes split into the tangential sites
/// {1, 2, 4, ..., 2^H} and the normal sites (everything else in the window).
class ModeSet {
 public:
  ModeSet() : ModeSet(4, 16) {}
  ModeSet(int h_max, int cutoff);

  int h_max() const { return h_max_; }
  int cutoff() const { return cutoff_; }
  /// Number of modes in the window, 2M + 1.
  int size() const { return 2 * cutoff_ + 1; }
  /// Dense slot of mode j in [0, size()).
  int slot(Mode j) const { return j + cutoff_; }
  Mode mode_at(int slot) const { return slot - cutoff_; }

  bool contains(Mode j) const { return j >= -cutoff_ && j <= cutoff_; }
  bool is_tangential(Mode j) const {
    return j > 0 && (j & (j - 1)) == 0 && j <= (1 << h_max_);
  }
  bool is_normal(Mode j) const { return contains(j) && !is_tangential(j); }

  const std::vector<Mode>& tangential() const { return tangential_; }
  const std::vector<Mode>& normal() const { return normal_; }
  /// All modes in ascending order.
  std::vector<Mode> all() const;

  friend bool operator==(const ModeSet& a, const ModeSet& b) {
    return a.h_max_ == b.h_max_ && a.cutoff_ == b.cutoff_;
  }

 private:
  int h_max_;
  int cutoff_;
  std::vector<Mode> tangential_;
  std::vector<Mode> normal_;
};

/// Multi-index α ∈ ℕ^ℤ with finite support, stored as a sorted multiset of
/// modes packed into one 64-bit word (ten 6-bit slots, ascending). Equality,
/// ordering and hashing are structural on the packed word.
class MultiIndex {
 public:
  static constexpr int kSlots = 10;
  static constexpr int kMaxAbsMode = 31;

  MultiIndex() = default;
  MultiIndex(std::initializer_list<std::pair<Mode, int>> entries);

  static MultiIndex from_entries(std::span<const std::pair<Mode, int>> entries);
  static MultiIndex unit(Mode j, int exponent = 1);
  static MultiIndex from_packed(std::uint64_t bits) {
    MultiIndex m;
    m.bits_ = bits;
    return m;
  }

  std::uint64_t packed() const { return bits_; }
  bool empty() const { return bits_ == 0; }
  /// |α| = Σ_j α_j.
  int total() const;
  int exponent(Mode j) const;
  /// Sorted (mode, exponent) pairs, exponents ≥ 1.
  std::vector<std::pair<Mode, int>> entries() const;

  /// Calls f(mode, exponent) for each support mode in ascending order.
  template <class F>
  void for_each(F&& f) const {
    std::uint64_t b = bits_;
    int prev = 0;
    int count = 0;
    while (b != 0) {
      const int code = static_cast<int>(b & 63u);
      b >>= 6;
      if (code == prev) {
        ++count;
      } else {
        if (count > 0) f(prev - 32, count);
        prev = code;
        count = 1;
      }
    }
    if (count > 0) f(prev - 32, count);
  }

  MultiIndex add(Mode j, int k = 1) const;
  /// Removes k copies of mode j; throws DomainError when α_j < k.
  MultiIndex remove(Mode j, int k = 1) const;
  /// α ⪯ β componentwise.
  bool precedes(const MultiIndex& other) const;

  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);
  /// Requires b ⪯ a.
  friend MultiIndex operator-(const MultiIndex& a, const MultiIndex& b);
  static MultiIndex common(const MultiIndex& a, const MultiIndex& b);

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

  std::string to_string() const;

 private:
  std::uint64_t bits_ = 0;
};

/// ℓ ∈ ℤ^ℤ with finite support, sparse and sorted by mode.
class SignedIndexVector {
 public:
  SignedIndexVector() = default;
  SignedIndexVector(std::initializer_list<std::pair<Mode, int>> entries);
  explicit SignedIndexVector(std::vector<std::pair<Mode, int>> entries);

  /// α − β.
  static SignedIndexVector difference(const MultiIndex& alpha, const MultiIndex& beta);
  static SignedIndexVector unit(Mode j, int value = 1) { return SignedIndexVector{{j, value}}; }

  const std::vector<std::pair<Mode, int>>& entries() const { return entries_; }
  int value(Mode j) const;
  bool is_zero() const { return entries_.empty(); }
  /// |ℓ| = Σ_j |ℓ_j|.
  int l1() const;

  /// ℓ⁺ and ℓ⁻ with disjoint supports, ℓ = ℓ⁺ − ℓ⁻.
  MultiIndex positive_part() const;
  MultiIndex negative_part() const;

  friend SignedIndexVector operator+(const SignedIndexVector& a, const SignedIndexVector& b);
  friend SignedIndexVector operator-(const SignedIndexVector& a, const SignedIndexVector& b);
  friend auto operator<=>(const SignedIndexVector&, const SignedIndexVector&) = default;

  std::string to_string() const;

 private:
  std::vector<std::pair<Mode, int>> entries_;
};

/// 𝔪(ℓ) = Σ_j ℓ_j.
long mass(const SignedIndexVector& l);
/// π(ℓ) = Σ_j j ℓ_j.
long momentum(const SignedIndexVector& l);
/// 𝚍(ℓ) = Σ_j j² ℓ_j.
long quad_moment(const SignedIndexVector& l);

/// Membership of (α, β) in the conserved set: equal mass and zero momentum.
bool is_admissible_pair(const MultiIndex& alpha, const MultiIndex& beta);

/// ⟨⟨j⟩⟩ = max(2, |j|).
inline double sobolev_bracket(Mode j) { return j < -2 || j > 2 ? double(j < 0 ? -j : j) : 2.0; }

}  // namespace kamlab
