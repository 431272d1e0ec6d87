#include "haarfactor/arith.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace hf {

namespace {

std::atomic<int> g_mode_override{-1};  // -1 none, else ArithMode value

// Unknown values fall back to exact rather than erroring: the variable is a
// tuning knob, not part of any file format.
ArithMode mode_from_env() {
  const char* v = std::getenv("HAARFACTOR_ARITH");
  if (v != nullptr && std::string(v) == "float") return ArithMode::Float;
  return ArithMode::Exact;
}

}  // namespace

ArithMode arith_mode() {
  int ov = g_mode_override.load(std::memory_order_relaxed);
  if (ov >= 0) return static_cast<ArithMode>(ov);
  return mode_from_env();
}

const char* arith_mode_name() {
  return arith_mode() == ArithMode::Exact ? "exact" : "float";
}

void set_arith_mode(ArithMode mode) {
  g_mode_override.store(static_cast<int>(mode), std::memory_order_relaxed);
}

void clear_arith_mode_override() {
  g_mode_override.store(-1, std::memory_order_relaxed);
}

void Dyadic::normalize() {
  if (num_.is_zero()) {
    exp_ = 0;
    return;
  }
  bigint a = boost::multiprecision::abs(num_);
  std::size_t tz = boost::multiprecision::lsb(a);
  if (tz > 0) {
    num_ >>= tz;
    exp_ += static_cast<int>(tz);
  }
}

Dyadic Dyadic::from_double(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("Dyadic: non-finite double");
  Dyadic d;
  if (v == 0.0) return d;
  int e = 0;
  double m = std::frexp(v, &e);           // v = m * 2^e, 0.5 <= |m| < 1
  double scaled = std::ldexp(m, 53);      // integer valued, |.| < 2^53
  d.num_ = static_cast<long long>(scaled);
  d.exp_ = e - 53;
  d.normalize();
  return d;
}

Dyadic Dyadic::scaled(long long count, int exp2) {
  Dyadic d;
  d.num_ = count;
  d.exp_ = exp2;
  d.normalize();
  return d;
}

Dyadic& Dyadic::operator+=(const Dyadic& o) {
  if (o.num_.is_zero()) return *this;
  if (num_.is_zero()) {
    *this = o;
    return *this;
  }
  if (exp_ <= o.exp_) {
    num_ += o.num_ << static_cast<unsigned>(o.exp_ - exp_);
  } else {
    num_ = (num_ << static_cast<unsigned>(exp_ - o.exp_)) + o.num_;
    exp_ = o.exp_;
  }
  normalize();
  return *this;
}

Dyadic& Dyadic::operator-=(const Dyadic& o) { return *this += o.negated(); }

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
  Dyadic r;
  if (a.num_.is_zero() || b.num_.is_zero()) return r;
  r.num_ = a.num_ * b.num_;
  r.exp_ = a.exp_ + b.exp_;
  r.normalize();
  return r;
}

Dyadic Dyadic::abs() const {
  Dyadic r = *this;
  if (r.num_.sign() < 0) r.num_ = -r.num_;
  return r;
}

Dyadic Dyadic::negated() const {
  Dyadic r = *this;
  r.num_ = -r.num_;
  return r;
}

int Dyadic::compare(const Dyadic& o) const {
  int sa = num_.sign();
  int sb = o.num_.sign();
  if (sa != sb) return sa < sb ? -1 : 1;
  if (sa == 0) return 0;
  Dyadic d = *this;
  d -= o;
  return d.num_.sign();
}

double Dyadic::to_double() const {
  if (num_.is_zero()) return 0.0;
  bool neg = num_.sign() < 0;
  bigint a = boost::multiprecision::abs(num_);
  std::size_t bits = boost::multiprecision::msb(a) + 1;
  double mag;
  if (bits <= 53) {
    mag = std::ldexp(a.convert_to<double>(), exp_);
  } else {
    // Round to nearest-even on the top 53 bits with a sticky bit.
    std::size_t shift = bits - 54;
    bigint top = a >> shift;
    bool sticky = shift > 0 && a != (top << shift);
    std::uint64_t q = top.convert_to<std::uint64_t>();  // exactly 54 bits
    bool round_bit = (q & 1u) != 0;
    q >>= 1;
    if (round_bit && (sticky || (q & 1u) != 0)) ++q;
    mag = std::ldexp(static_cast<double>(q),
                     exp_ + static_cast<int>(shift) + 1);
  }
  return neg ? -mag : mag;
}

bigrational rational_from_double(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("rational_from_double: non-finite");
  if (v == 0.0) return bigrational(0);
  int e = 0;
  double m = std::frexp(v, &e);
  long long p = static_cast<long long>(std::ldexp(m, 53));
  int exp2 = e - 53;
  bigrational r(p);
  if (exp2 >= 0) {
    r *= bigrational(bigint(1) << exp2);
  } else {
    r /= bigrational(bigint(1) << (-exp2));
  }
  return r;
}

}  // namespace hf
