#pragma once
// Exact rationals and Gaussian rationals. Thin value wrapper over Boost's
// cpp_rational with expression templates off, so everything is a plain value.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <complex>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace parh {

class Rational {
public:
    using Big = boost::multiprecision::number<
        boost::multiprecision::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
        boost::multiprecision::et_off>;
    using Int = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                              boost::multiprecision::et_off>;

    Rational() = default;
    Rational(long long n) : v_(n) {}  // NOLINT(implicit)
    Rational(long long n, long long d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        v_ = Big(Int(n), Int(d));
    }
    explicit Rational(Big v) : v_(std::move(v)) {}

    // Accepts "p/q", "p", optional leading sign and surrounding blanks.
    static Rational parse(std::string_view s) {
        auto trim = [](std::string_view x) {
            while (!x.empty() && (x.front() == ' ' || x.front() == '\t')) x.remove_prefix(1);
            while (!x.empty() && (x.back() == ' ' || x.back() == '\t')) x.remove_suffix(1);
            return x;
        };
        s = trim(s);
        auto is_int = [](std::string_view x) {
            if (x.empty()) return false;
            std::size_t i = (x[0] == '-' || x[0] == '+') ? 1 : 0;
            if (i == x.size()) return false;
            for (; i < x.size(); ++i)
                if (x[i] < '0' || x[i] > '9') return false;
            return true;
        };
        auto to_int = [](std::string_view x) {
            bool neg = !x.empty() && x[0] == '-';
            if (!x.empty() && (x[0] == '+' || x[0] == '-')) x.remove_prefix(1);
            while (x.size() > 1 && x[0] == '0') x.remove_prefix(1);  // no octal
            Int v{std::string(x)};
            return neg ? Int(-v) : v;
        };
        auto slash = s.find('/');
        if (slash == std::string_view::npos) {
            if (!is_int(s)) throw std::invalid_argument("malformed rational '" + std::string(s) + "'");
            return Rational(Big(to_int(s)));
        }
        auto num = trim(s.substr(0, slash)), den = trim(s.substr(slash + 1));
        if (!is_int(num) || !is_int(den) || den[0] == '-')
            throw std::invalid_argument("malformed rational '" + std::string(s) + "'");
        Int d = to_int(den);
        if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(s) + "'");
        return Rational(Big(to_int(num), d));
    }

    const Big& big() const { return v_; }
    Int num() const { return boost::multiprecision::numerator(v_); }
    Int den() const { return boost::multiprecision::denominator(v_); }

    std::string str() const {
        if (den() == 1) return num().str();
        return num().str() + "/" + den().str();
    }
    double to_double() const { return v_.convert_to<double>(); }
    bool is_integer() const { return den() == 1; }

    // floor / ceil as exact integers
    Int floor() const {
        Int n = num(), d = den();
        Int q = n / d;
        if (n % d != 0 && n < 0) q -= 1;
        return q;
    }
    Int ceil() const {
        Int n = num(), d = den();
        Int q = n / d;
        if (n % d != 0 && n > 0) q += 1;
        return q;
    }
    long long to_ll() const {
        if (!is_integer()) throw std::domain_error("not an integer: " + str());
        return num().convert_to<long long>();
    }

    Rational operator-() const { return Rational(Big(-v_)); }
    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.v_ == 0) throw std::domain_error("rational division by zero");
        v_ /= o.v_;
        return *this;
    }
    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        if (a.v_ < b.v_) return std::strong_ordering::less;
        if (a.v_ > b.v_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }
    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    Big v_{0};
};

inline Rational abs(const Rational& r) { return r < Rational(0) ? -r : r; }
inline Rational from_int(const Rational::Int& i) { return Rational(Rational::Big(i)); }

// Exact Gaussian rational re + i*im.
struct ComplexQ {
    Rational re, im;

    ComplexQ() = default;
    ComplexQ(Rational r) : re(std::move(r)) {}  // NOLINT(implicit)
    ComplexQ(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    ComplexQ(long long r) : re(r) {}  // NOLINT(implicit)

    friend ComplexQ operator+(const ComplexQ& a, const ComplexQ& b) { return {a.re + b.re, a.im + b.im}; }
    friend ComplexQ operator-(const ComplexQ& a, const ComplexQ& b) { return {a.re - b.re, a.im - b.im}; }
    friend ComplexQ operator*(const ComplexQ& a, const ComplexQ& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend ComplexQ operator/(const ComplexQ& a, const Rational& s) { return {a.re / s, a.im / s}; }
    friend bool operator==(const ComplexQ& a, const ComplexQ& b) { return a.re == b.re && a.im == b.im; }

    bool is_zero() const { return re == Rational(0) && im == Rational(0); }
    Rational norm2() const { return re * re + im * im; }
    std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }

    // "p/q" when real, otherwise "a+bi" with rational parts
    std::string str() const {
        if (im == Rational(0)) return re.str();
        std::string s = re == Rational(0) ? std::string() : re.str();
        std::string i = im.str();
        if (!s.empty() && im > Rational(0)) s += "+";
        return s + i + "i";
    }
};

}  // namespace parh
