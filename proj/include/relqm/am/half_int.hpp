#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace relqm {

/// Exact half-integer quantum number, stored as twice its value.
///
/// Used for every spin label j and projection m in the library, so that
/// angular-momentum bookkeeping never goes through floating point.
class HalfInt {
 public:
  constexpr HalfInt() = default;

  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  static constexpr HalfInt from_int(int value) { return HalfInt(2 * value); }

  /// Parses "n" or "n/2" (optionally signed, surrounding blanks ignored).
  /// Throws DomainError on anything else.
  static HalfInt parse(std::string_view text);

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  /// Number of projections 2j+1 for a spin label.
  constexpr int multiplicity() const { return twice_ + 1; }

  /// j(j+1) for a spin label.
  constexpr double casimir() const { return 0.25 * twice_ * (twice_ + 2); }

  std::string str() const;

  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  constexpr HalfInt& operator+=(HalfInt o) {
    twice_ += o.twice_;
    return *this;
  }
  constexpr HalfInt& operator-=(HalfInt o) {
    twice_ -= o.twice_;
    return *this;
  }
  friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return a += b; }
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return a -= b; }
  friend constexpr auto operator<=>(HalfInt, HalfInt) = default;

 private:
  explicit constexpr HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

std::ostream& operator<<(std::ostream& os, HalfInt h);

inline namespace literals {
/// 3_hi == 3, use HalfInt::from_twice(1) for one half.
constexpr HalfInt operator""_hi(unsigned long long v) {
  return HalfInt::from_int(static_cast<int>(v));
}
}  // namespace literals

inline constexpr HalfInt kHalf = HalfInt::from_twice(1);

/// True when |m| <= j and j - m is an integer.
constexpr bool is_projection_of(HalfInt m, HalfInt j) {
  return j.twice() >= 0 && m.twice() <= j.twice() && -m.twice() <= j.twice() &&
         (j.twice() - m.twice()) % 2 == 0;
}

/// Throws DomainError when j is negative or m is not a projection of j.
void require_projection(HalfInt m, HalfInt j, std::string_view what);
void require_spin(HalfInt j, std::string_view what);

/// |j1 - j2| <= j3 <= j1 + j2 with j1 + j2 + j3 integer.
constexpr bool satisfies_triangle(HalfInt j1, HalfInt j2, HalfInt j3) {
  const int a = j1.twice(), b = j2.twice(), c = j3.twice();
  if (a < 0 || b < 0 || c < 0) return false;
  if ((a + b + c) % 2 != 0) return false;
  const int lo = a > b ? a - b : b - a;
  return lo <= c && c <= a + b;
}

/// Projections j, j-1, ..., -j (descending, the basis order used everywhere).
std::vector<HalfInt> projections(HalfInt j);

/// Allowed couplings |j1-j2|, ..., j1+j2 in descending order.
std::vector<HalfInt> coupled_spins(HalfInt j1, HalfInt j2);

}  // namespace relqm

template <>
struct std::hash<relqm::HalfInt> {
  std::size_t operator()(relqm::HalfInt h) const noexcept {
    return std::hash<int>{}(h.twice());
  }
};
