#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "cantor/errors.hpp"

namespace cantor {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Exact dyadic rational num * 2^-exp with exp >= 0.  Canonical form keeps the
// numerator odd whenever exp > 0, so equality is structural.  Arithmetic never
// rounds; the numerator is arbitrary precision because thinning exponents grow
// with the construction.
class Dyadic {
public:
    Dyadic() : num_(0), exp_(0) {}
    Dyadic(long v) : num_(v), exp_(0) {}
    Dyadic(BigInt num, unsigned exp) : num_(std::move(num)), exp_(exp) { normalize(); }

    // 2^-e
    static Dyadic pow2(int e);
    static Dyadic zero() { return Dyadic(); }
    static Dyadic one() { return Dyadic(1); }

    const BigInt& numerator() const { return num_; }
    unsigned exponent() const { return exp_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return exp_ == 0; }

    Dyadic operator+(const Dyadic& o) const;
    Dyadic operator-(const Dyadic& o) const;
    Dyadic operator*(const Dyadic& o) const;
    Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }
    Dyadic& operator-=(const Dyadic& o) { return *this = *this - o; }
    Dyadic& operator*=(const Dyadic& o) { return *this = *this * o; }

    int compare(const Dyadic& o) const;
    bool operator==(const Dyadic& o) const { return num_ == o.num_ && exp_ == o.exp_; }
    bool operator!=(const Dyadic& o) const { return !(*this == o); }
    bool operator<(const Dyadic& o) const { return compare(o) < 0; }
    bool operator<=(const Dyadic& o) const { return compare(o) <= 0; }
    bool operator>(const Dyadic& o) const { return compare(o) > 0; }
    bool operator>=(const Dyadic& o) const { return compare(o) >= 0; }

    Rational to_rational() const;
    double to_double() const;

    // Text form: "m/2^e", with "0"/"1" (and any plain integer) as shorthands.
    std::string text() const;
    static Dyadic parse(const std::string& s);

private:
    void normalize();

    BigInt num_;
    unsigned exp_;
};

}  // namespace cantor
