#pragma once

#include <compare>
#include <cstdlib>
#include <functional>
#include <string>

namespace fermidark {

// Exact half-integer arithmetic. The value j is stored as 2j so that both
// integer and half-integer angular momenta (and projections) are represented
// without rounding. All angular-momentum bookkeeping in the library runs on
// this type; conversion to double happens only at the numerical boundary.
class HalfInt {
 public:
  constexpr HalfInt() = default;

  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  static constexpr HalfInt whole(int value) { return HalfInt(2 * value); }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return twice_ / 2.0; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  constexpr bool is_negative() const { return twice_ < 0; }
  constexpr HalfInt abs() const { return HalfInt(twice_ < 0 ? -twice_ : twice_); }

  // True when m is a valid projection of a spin of magnitude j: |m| <= j and
  // parity(2m) == parity(2j).
  static constexpr bool valid_projection(HalfInt j, HalfInt m) {
    return std::abs(m.twice_) <= j.twice_ &&
           ((j.twice_ - m.twice_) % 2 == 0);
  }

  // Renders "2", "-3", "1/2", "-9/2".
  std::string str() const;
  // Parses the formats produced by str(), plus an optional leading '+'.
  // Throws std::invalid_argument on malformed input.
  static HalfInt parse(const std::string& text);

  friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return HalfInt(a.twice_ + b.twice_); }
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return HalfInt(a.twice_ - b.twice_); }
  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  friend constexpr auto operator<=>(const HalfInt&, const HalfInt&) = default;

 private:
  explicit constexpr HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

inline constexpr HalfInt operator""_half(unsigned long long twice) {
  return HalfInt::from_twice(static_cast<int>(twice));
}

}  // namespace fermidark

template <>
struct std::hash<fermidark::HalfInt> {
  std::size_t operator()(const fermidark::HalfInt& h) const noexcept {
    return std::hash<int>()(h.twice());
  }
};
