#include "cantor/dyadic.hpp"

#include <algorithm>
#include <cctype>

namespace cantor {

void Dyadic::normalize() {
    if (num_ == 0) {
        exp_ = 0;
        return;
    }
    while (exp_ > 0 && (num_ & 1) == 0) {
        num_ >>= 1;
        --exp_;
    }
}

Dyadic Dyadic::pow2(int e) {
    if (e < 0) return Dyadic(BigInt(1), static_cast<unsigned>(-e));
    return Dyadic(BigInt(1) << static_cast<unsigned>(e), 0);
}

Dyadic Dyadic::operator+(const Dyadic& o) const {
    unsigned e = std::max(exp_, o.exp_);
    BigInt a = num_ << (e - exp_);
    BigInt b = o.num_ << (e - o.exp_);
    return Dyadic(a + b, e);
}

Dyadic Dyadic::operator-(const Dyadic& o) const {
    unsigned e = std::max(exp_, o.exp_);
    BigInt a = num_ << (e - exp_);
    BigInt b = o.num_ << (e - o.exp_);
    return Dyadic(a - b, e);
}

Dyadic Dyadic::operator*(const Dyadic& o) const {
    return Dyadic(num_ * o.num_, exp_ + o.exp_);
}

int Dyadic::compare(const Dyadic& o) const {
    unsigned e = std::max(exp_, o.exp_);
    BigInt a = num_ << (e - exp_);
    BigInt b = o.num_ << (e - o.exp_);
    if (a < b) return -1;
    if (a > b) return 1;
    return 0;
}

Rational Dyadic::to_rational() const {
    return Rational(num_, BigInt(1) << exp_);
}

double Dyadic::to_double() const {
    return static_cast<double>(to_rational());
}

std::string Dyadic::text() const {
    if (exp_ == 0) return num_.str();
    return num_.str() + "/2^" + std::to_string(exp_);
}

Dyadic Dyadic::parse(const std::string& s) {
    if (s.empty()) fail(ErrorKind::ParseError, "empty dyadic");
    auto slash = s.find('/');
    auto parse_int = [&](const std::string& part) -> BigInt {
        if (part.empty()) fail(ErrorKind::ParseError, "bad dyadic: " + s);
        size_t i = (part[0] == '-') ? 1 : 0;
        if (i == part.size()) fail(ErrorKind::ParseError, "bad dyadic: " + s);
        for (; i < part.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(part[i])))
                fail(ErrorKind::ParseError, "bad dyadic: " + s);
        return BigInt(part);
    };
    if (slash == std::string::npos) return Dyadic(parse_int(s), 0);
    std::string den = s.substr(slash + 1);
    if (den.size() < 3 || den[0] != '2' || den[1] != '^')
        fail(ErrorKind::ParseError, "dyadic denominator must be 2^e: " + s);
    BigInt e = parse_int(den.substr(2));
    if (e < 0 || e > 100000) fail(ErrorKind::ParseError, "dyadic exponent out of range: " + s);
    return Dyadic(parse_int(s.substr(0, slash)), static_cast<unsigned>(e));
}

}  // namespace cantor
