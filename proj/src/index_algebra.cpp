#include "kamlab/index_algebra.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "kamlab/error.hpp"

namespace kamlab {

namespace {

struct Codes {
  std::array<std::uint8_t, MultiIndex::kSlots> c{};
  int n = 0;
};

Codes decode(std::uint64_t bits) {
  Codes out;
  while (bits != 0) {
    out.c[out.n++] = static_cast<std::uint8_t>(bits & 63u);
    bits >>= 6;
  }
  return out;
}

std::uint64_t encode(const std::uint8_t* codes, int n) {
  if (n > MultiIndex::kSlots) {
    throw DomainError("multi-index degree exceeds " + std::to_string(MultiIndex::kSlots));
  }
  std::uint64_t bits = 0;
  for (int i = n - 1; i >= 0; --i) bits = (bits << 6) | codes[i];
  return bits;
}

std::uint8_t code_of(Mode j) {
  if (j < -MultiIndex::kMaxAbsMode || j > MultiIndex::kMaxAbsMode) {
    throw DomainError("mode " + std::to_string(j) + " outside the packable range");
  }
  return static_cast<std::uint8_t>(j + 32);
}

}  // namespace

ModeSet::ModeSet(int h_max, int cutoff) : h_max_(h_max), cutoff_(cutoff) {
  if (h_max < 0) throw DomainError("ModeSet: h_max must be >= 0");
  if (cutoff < (1 << h_max)) throw DomainError("ModeSet: cutoff M must be >= 2^h_max");
  if (cutoff > MultiIndex::kMaxAbsMode) {
    throw DomainError("ModeSet: cutoff M must be <= " + std::to_string(MultiIndex::kMaxAbsMode));
  }
  for (Mode j = -cutoff; j <= cutoff; ++j) {
    (is_tangential(j) ? tangential_ : normal_).push_back(j);
  }
}

std::vector<Mode> ModeSet::all() const {
  std::vector<Mode> out;
  out.reserve(size());
  for (Mode j = -cutoff_; j <= cutoff_; ++j) out.push_back(j);
  return out;
}

MultiIndex::MultiIndex(std::initializer_list<std::pair<Mode, int>> entries)
    : MultiIndex(from_entries(std::span<const std::pair<Mode, int>>(entries.begin(), entries.size()))) {}

MultiIndex MultiIndex::from_entries(std::span<const std::pair<Mode, int>> entries) {
  std::vector<std::uint8_t> codes;
  for (const auto& [j, e] : entries) {
    if (e < 0) throw DomainError("MultiIndex: negative exponent");
    for (int k = 0; k < e; ++k) codes.push_back(code_of(j));
  }
  std::sort(codes.begin(), codes.end());
  return from_packed(encode(codes.data(), static_cast<int>(codes.size())));
}

MultiIndex MultiIndex::unit(Mode j, int exponent) {
  const std::pair<Mode, int> e{j, exponent};
  return from_entries(std::span<const std::pair<Mode, int>>(&e, 1));
}

int MultiIndex::total() const {
  int n = 0;
  for (std::uint64_t b = bits_; b != 0; b >>= 6) ++n;
  return n;
}

int MultiIndex::exponent(Mode j) const {
  if (j < -kMaxAbsMode || j > kMaxAbsMode) return 0;
  const std::uint64_t c = static_cast<std::uint64_t>(j + 32);
  int n = 0;
  for (std::uint64_t b = bits_; b != 0; b >>= 6) n += (b & 63u) == c;
  return n;
}

std::vector<std::pair<Mode, int>> MultiIndex::entries() const {
  std::vector<std::pair<Mode, int>> out;
  for_each([&](Mode j, int e) { out.emplace_back(j, e); });
  return out;
}

MultiIndex MultiIndex::add(Mode j, int k) const {
  if (k == 0) return *this;
  return *this + unit(j, k);
}

MultiIndex MultiIndex::remove(Mode j, int k) const {
  if (k == 0) return *this;
  return *this - unit(j, k);
}

bool MultiIndex::precedes(const MultiIndex& other) const {
  const Codes a = decode(bits_);
  const Codes b = decode(other.bits_);
  int i = 0;
  int k = 0;
  while (i < a.n) {
    while (k < b.n && b.c[k] < a.c[i]) ++k;
    if (k == b.n || b.c[k] != a.c[i]) return false;
    ++i;
    ++k;
  }
  return true;
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
  if (b.bits_ == 0) return a;
  if (a.bits_ == 0) return b;
  const Codes x = decode(a.bits_);
  const Codes y = decode(b.bits_);
  std::uint8_t merged[2 * MultiIndex::kSlots];
  std::merge(x.c.begin(), x.c.begin() + x.n, y.c.begin(), y.c.begin() + y.n, merged);
  return MultiIndex::from_packed(encode(merged, x.n + y.n));
}

MultiIndex operator-(const MultiIndex& a, const MultiIndex& b) {
  if (b.bits_ == 0) return a;
  const Codes x = decode(a.bits_);
  const Codes y = decode(b.bits_);
  std::uint8_t out[MultiIndex::kSlots];
  int n = 0;
  int k = 0;
  for (int i = 0; i < x.n; ++i) {
    if (k < y.n && y.c[k] == x.c[i]) {
      ++k;
    } else {
      if (k < y.n && y.c[k] < x.c[i]) throw DomainError("MultiIndex subtraction: subtrahend not dominated");
      out[n++] = x.c[i];
    }
  }
  if (k != y.n) throw DomainError("MultiIndex subtraction: subtrahend not dominated");
  return MultiIndex::from_packed(encode(out, n));
}

MultiIndex MultiIndex::common(const MultiIndex& a, const MultiIndex& b) {
  const Codes x = decode(a.bits_);
  const Codes y = decode(b.bits_);
  std::uint8_t out[kSlots];
  const auto end = std::set_intersection(x.c.begin(), x.c.begin() + x.n, y.c.begin(), y.c.begin() + y.n, out);
  return from_packed(encode(out, static_cast<int>(end - out)));
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << '[';
  bool first = true;
  for_each([&](Mode j, int e) {
    os << (first ? "" : ",") << '(' << j << ',' << e << ')';
    first = false;
  });
  os << ']';
  return os.str();
}

SignedIndexVector::SignedIndexVector(std::initializer_list<std::pair<Mode, int>> entries)
    : SignedIndexVector(std::vector<std::pair<Mode, int>>(entries)) {}

SignedIndexVector::SignedIndexVector(std::vector<std::pair<Mode, int>> entries) {
  std::sort(entries.begin(), entries.end());
  for (const auto& [j, v] : entries) {
    if (!entries_.empty() && entries_.back().first == j) {
      entries_.back().second += v;
    } else {
      entries_.emplace_back(j, v);
    }
  }
  std::erase_if(entries_, [](const auto& e) { return e.second == 0; });
}

SignedIndexVector SignedIndexVector::difference(const MultiIndex& alpha, const MultiIndex& beta) {
  std::vector<std::pair<Mode, int>> e;
  alpha.for_each([&](Mode j, int k) { e.emplace_back(j, k); });
  beta.for_each([&](Mode j, int k) { e.emplace_back(j, -k); });
  return SignedIndexVector(std::move(e));
}

int SignedIndexVector::value(Mode j) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair<Mode, int>{j, INT32_MIN});
  return it != entries_.end() && it->first == j ? it->second : 0;
}

int SignedIndexVector::l1() const {
  int s = 0;
  for (const auto& e : entries_) s += std::abs(e.second);
  return s;
}

MultiIndex SignedIndexVector::positive_part() const {
  std::vector<std::pair<Mode, int>> e;
  for (const auto& [j, v] : entries_)
    if (v > 0) e.emplace_back(j, v);
  return MultiIndex::from_entries(e);
}

MultiIndex SignedIndexVector::negative_part() const {
  std::vector<std::pair<Mode, int>> e;
  for (const auto& [j, v] : entries_)
    if (v < 0) e.emplace_back(j, -v);
  return MultiIndex::from_entries(e);
}

SignedIndexVector operator+(const SignedIndexVector& a, const SignedIndexVector& b) {
  auto e = a.entries_;
  e.insert(e.end(), b.entries_.begin(), b.entries_.end());
  return SignedIndexVector(std::move(e));
}

SignedIndexVector operator-(const SignedIndexVector& a, const SignedIndexVector& b) {
  auto e = a.entries_;
  for (const auto& [j, v] : b.entries_) e.emplace_back(j, -v);
  return SignedIndexVector(std::move(e));
}

std::string SignedIndexVector::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    os << (i ? "," : "") << '(' << entries_[i].first << ',' << entries_[i].second << ')';
  }
  os << ']';
  return os.str();
}

long mass(const SignedIndexVector& l) {
  long s = 0;
  for (const auto& [j, v] : l.entries()) s += v;
  return s;
}

long momentum(const SignedIndexVector& l) {
  long s = 0;
  for (const auto& [j, v] : l.entries()) s += static_cast<long>(j) * v;
  return s;
}

long quad_moment(const SignedIndexVector& l) {
  long s = 0;
  for (const auto& [j, v] : l.entries()) s += static_cast<long>(j) * j * v;
  return s;
}

bool is_admissible_pair(const MultiIndex& alpha, const MultiIndex& beta) {
  if (alpha.total() != beta.total()) return false;
  long p = 0;
  alpha.for_each([&](Mode j, int k) { p += static_cast<long>(j) * k; });
  beta.for_each([&](Mode j, int k) { p -= static_cast<long>(j) * k; });
  return p == 0;
}

}  // namespace kamlab
