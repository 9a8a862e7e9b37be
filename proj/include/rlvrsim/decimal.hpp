#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rlvrsim {

// Raised when a caller breaks a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Exact decimal number stored as mantissa * 10^-scale.
//
// Equality and ordering compare values, so 79.637 == 79.6370. The scale is
// kept as given so terms render with their original number of decimal places.
class Decimal {
 public:
  static constexpr int kMaxScale = 18;

  constexpr Decimal() = default;
  Decimal(std::int64_t mantissa, int scale);

  // Accepts an optional sign, digits with optional thousands-separator commas
  // and an optional fractional part. Leading/trailing blanks are ignored.
  static std::optional<Decimal> parse(std::string_view text);

  std::int64_t mantissa() const { return mantissa_; }
  int scale() const { return scale_; }

  // Same value at a larger scale. Throws std::overflow_error when the
  // mantissa does not fit.
  Decimal rescaled(int scale) const;
  // Same value with trailing fractional zeros removed.
  Decimal trimmed() const;

  bool is_zero() const { return mantissa_ == 0; }
  bool is_negative() const { return mantissa_ < 0; }
  Decimal abs() const { return Decimal(mantissa_ < 0 ? -mantissa_ : mantissa_, scale_); }

  // Number of digits in the integer part of |value|; zero counts as one.
  int integer_digits() const;

  // Renders exactly `scale()` fractional digits.
  std::string to_string() const;
  // Trailing zeros trimmed; integers render without a decimal point.
  std::string to_minimal_string() const;
  double to_double() const;

  friend Decimal operator+(const Decimal& a, const Decimal& b);
  friend Decimal operator-(const Decimal& a, const Decimal& b);
  Decimal operator-() const;

  friend bool operator==(const Decimal& a, const Decimal& b);
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);

  // Bitwise representation equality (value and scale).
  bool same_representation(const Decimal& other) const {
    return mantissa_ == other.mantissa_ && scale_ == other.scale_;
  }

 private:
  std::int64_t mantissa_ = 0;
  int scale_ = 0;
};

}  // namespace rlvrsim
