#include "rlvrsim/decimal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rlvrsim {
namespace {

using i128 = __int128;

constexpr std::int64_t kPow10[19] = {1LL,
                                     10LL,
                                     100LL,
                                     1000LL,
                                     10000LL,
                                     100000LL,
                                     1000000LL,
                                     10000000LL,
                                     100000000LL,
                                     1000000000LL,
                                     10000000000LL,
                                     100000000000LL,
                                     1000000000000LL,
                                     10000000000000LL,
                                     100000000000000LL,
                                     1000000000000000LL,
                                     10000000000000000LL,
                                     100000000000000000LL,
                                     1000000000000000000LL};

std::int64_t narrow(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < -std::numeric_limits<std::int64_t>::max()) {
    throw std::overflow_error("decimal mantissa overflow");
  }
  return static_cast<std::int64_t>(v);
}

i128 scaled_mantissa(const Decimal& d, int scale) {
  return static_cast<i128>(d.mantissa()) * kPow10[scale - d.scale()];
}

}  // namespace

Decimal::Decimal(std::int64_t mantissa, int scale)
    : mantissa_(mantissa), scale_(scale) {
  if (scale < 0 || scale > kMaxScale) {
    throw ContractViolation("decimal scale out of range: " + std::to_string(scale));
  }
  if (mantissa == std::numeric_limits<std::int64_t>::min()) {
    throw std::overflow_error("decimal mantissa overflow");
  }
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  auto is_blank = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!text.empty() && is_blank(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_blank(text.back())) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;

  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }

  i128 mantissa = 0;
  int scale = 0;
  int digits = 0;
  bool in_fraction = false;
  char prev = '\0';
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      if (mantissa > std::numeric_limits<std::int64_t>::max()) return std::nullopt;
      ++digits;
      if (in_fraction) {
        if (++scale > kMaxScale) return std::nullopt;
      }
    } else if (c == ',') {
      // Separator only between integer-part digits.
      const bool next_is_digit = i + 1 < text.size() && text[i + 1] >= '0' && text[i + 1] <= '9';
      if (in_fraction || !(prev >= '0' && prev <= '9') || !next_is_digit) return std::nullopt;
    } else if (c == '.') {
      if (in_fraction) return std::nullopt;
      in_fraction = true;
    } else {
      return std::nullopt;
    }
    prev = c;
  }
  if (digits == 0) return std::nullopt;
  const auto m = static_cast<std::int64_t>(mantissa);
  return Decimal(negative ? -m : m, scale);
}

Decimal Decimal::rescaled(int scale) const {
  if (scale < scale_ || scale > kMaxScale) {
    throw ContractViolation("cannot rescale decimal from " + std::to_string(scale_) + " to " +
                            std::to_string(scale));
  }
  return Decimal(narrow(scaled_mantissa(*this, scale)), scale);
}

Decimal Decimal::trimmed() const {
  std::int64_t m = mantissa_;
  int s = scale_;
  while (s > 0 && m % 10 == 0) {
    m /= 10;
    --s;
  }
  return Decimal(m, s);
}

int Decimal::integer_digits() const {
  std::int64_t ip = (mantissa_ < 0 ? -mantissa_ : mantissa_) / kPow10[scale_];
  int n = 1;
  while (ip >= 10) {
    ip /= 10;
    ++n;
  }
  return n;
}

std::string Decimal::to_string() const {
  const std::int64_t mag = mantissa_ < 0 ? -mantissa_ : mantissa_;
  std::string out = mantissa_ < 0 ? "-" : "";
  out += std::to_string(mag / kPow10[scale_]);
  if (scale_ > 0) {
    std::string frac = std::to_string(mag % kPow10[scale_]);
    out += '.';
    out.append(static_cast<std::size_t>(scale_) - frac.size(), '0');
    out += frac;
  }
  return out;
}

std::string Decimal::to_minimal_string() const { return trimmed().to_string(); }

double Decimal::to_double() const {
  return static_cast<double>(mantissa_) / static_cast<double>(kPow10[scale_]);
}

Decimal operator+(const Decimal& a, const Decimal& b) {
  const int s = std::max(a.scale_, b.scale_);
  return Decimal(narrow(scaled_mantissa(a, s) + scaled_mantissa(b, s)), s);
}

Decimal operator-(const Decimal& a, const Decimal& b) {
  const int s = std::max(a.scale_, b.scale_);
  return Decimal(narrow(scaled_mantissa(a, s) - scaled_mantissa(b, s)), s);
}

Decimal Decimal::operator-() const { return Decimal(-mantissa_, scale_); }

bool operator==(const Decimal& a, const Decimal& b) { return (a <=> b) == 0; }

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
  const int s = std::max(a.scale_, b.scale_);
  const i128 x = scaled_mantissa(a, s);
  const i128 y = scaled_mantissa(b, s);
  if (x < y) return std::strong_ordering::less;
  if (x > y) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace rlvrsim
