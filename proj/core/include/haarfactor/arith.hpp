#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>

namespace hf {

using bigint = boost::multiprecision::cpp_int;
using bigrational = boost::multiprecision::cpp_rational;

// Which arithmetic the norm/profile kernels use. Exact keeps every
// intermediate as a dyadic rational and rounds once at the end; Float is
// plain double throughout. Combinatorial predicates (coverage tests,
// Carleson comparisons, density thresholds) are exact in both modes.
enum class ArithMode { Exact, Float };

// Resolution order: explicit override, then HAARFACTOR_ARITH env var
// ("exact" or "float"), then Exact.
ArithMode arith_mode();
const char* arith_mode_name();
void set_arith_mode(ArithMode mode);
void clear_arith_mode_override();

// Exact dyadic rational num * 2^exp. Doubles are dyadic, so conversion in
// is exact; +, -, * never round; conversion out rounds correctly to
// nearest-even once. That is all the arithmetic the exact kernels need.
class Dyadic {
public:
  Dyadic() = default;
  explicit Dyadic(long long v) : num_(v) { normalize(); }
  static Dyadic from_double(double v);
  static Dyadic scaled(long long count, int exp2);  // count * 2^exp2

  bool is_zero() const { return num_.is_zero(); }
  int sign() const { return num_.sign(); }

  Dyadic& operator+=(const Dyadic& o);
  Dyadic& operator-=(const Dyadic& o);
  friend Dyadic operator+(Dyadic a, const Dyadic& b) { return a += b; }
  friend Dyadic operator-(Dyadic a, const Dyadic& b) { return a -= b; }
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
  Dyadic abs() const;
  Dyadic negated() const;

  int compare(const Dyadic& o) const;
  bool operator==(const Dyadic& o) const { return compare(o) == 0; }
  bool operator!=(const Dyadic& o) const { return compare(o) != 0; }
  bool operator<(const Dyadic& o) const { return compare(o) < 0; }
  bool operator>(const Dyadic& o) const { return compare(o) > 0; }
  bool operator<=(const Dyadic& o) const { return compare(o) <= 0; }
  bool operator>=(const Dyadic& o) const { return compare(o) >= 0; }

  double to_double() const;

  const bigint& numerator() const { return num_; }
  int exponent() const { return exp_; }

private:
  bigint num_;
  int exp_ = 0;
  void normalize();
};

// Exact rational from a double (every finite double is p * 2^e).
bigrational rational_from_double(double v);

}  // namespace hf
