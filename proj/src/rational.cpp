#include "convlab/rational.hpp"

#include "convlab/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>

namespace convlab {

namespace {

BigInt pow10(unsigned exponent) {
    BigInt result = 1;
    for (unsigned i = 0; i < exponent; ++i) result *= 10;
    return result;
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

Rational parse_decimal(std::string_view text) {
    const std::string original(text);
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }

    long exponent = 0;
    if (auto epos = text.find_first_of("eE"); epos != std::string_view::npos) {
        std::string_view exp_text = text.substr(epos + 1);
        text = text.substr(0, epos);
        bool exp_negative = false;
        if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
            exp_negative = exp_text.front() == '-';
            exp_text.remove_prefix(1);
        }
        if (!all_digits(exp_text) || exp_text.size() > 6) {
            throw DomainError("malformed number: " + original);
        }
        exponent = std::stol(std::string(exp_text));
        if (exp_negative) exponent = -exponent;
    }

    std::string digits;
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        const auto int_part = text.substr(0, dot);
        const auto frac_part = text.substr(dot + 1);
        if ((int_part.empty() && frac_part.empty()) ||
            (!int_part.empty() && !all_digits(int_part)) ||
            (!frac_part.empty() && !all_digits(frac_part))) {
            throw DomainError("malformed number: " + original);
        }
        digits = std::string(int_part) + std::string(frac_part);
        exponent -= static_cast<long>(frac_part.size());
    } else {
        if (!all_digits(text)) throw DomainError("malformed number: " + original);
        digits = std::string(text);
    }

    // cpp_int reads a leading 0 as octal.
    const auto nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    BigInt mantissa(digits);
    Rational value = exponent >= 0 ? Rational(mantissa * pow10(static_cast<unsigned>(exponent)))
                                   : Rational(mantissa, pow10(static_cast<unsigned>(-exponent)));
    return negative ? Rational(-value) : value;
}

} // namespace

Rational parse_rational(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (text.empty()) throw DomainError("empty number");

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        Rational num = parse_decimal(text.substr(0, slash));
        Rational den = parse_decimal(text.substr(slash + 1));
        if (den == 0) throw DomainError("zero denominator: " + std::string(text));
        return num / den;
    }
    return parse_decimal(text);
}

Rational rationalize(double value) {
    if (!std::isfinite(value)) throw DomainError("cannot rationalize a non-finite value");
    return parse_rational(format_double(value));
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

std::string format_double(double value) {
    std::array<char, 64> buffer{};
    auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    if (ec != std::errc{}) throw DomainError("cannot format value");
    return std::string(buffer.data(), end);
}

std::string format_rational(const Rational& value) {
    const BigInt num = boost::multiprecision::numerator(value);
    BigInt den = boost::multiprecision::denominator(value);

    // Only denominators of the form 2^a 5^b have a terminating decimal.
    unsigned twos = 0;
    unsigned fives = 0;
    BigInt rest = den;
    while (rest % 2 == 0) {
        rest /= 2;
        ++twos;
    }
    while (rest % 5 == 0) {
        rest /= 5;
        ++fives;
    }
    if (rest != 1 || std::max(twos, fives) > 30) {
        return num.str() + "/" + den.str();
    }

    const unsigned places = std::max(twos, fives);
    const BigInt scaled = num * (pow10(places) / den);
    const bool negative = scaled < 0;
    std::string digits = (negative ? BigInt(-scaled) : scaled).str();
    if (places == 0) return (negative ? "-" : "") + digits;
    if (digits.size() <= places) digits.insert(0, places + 1 - digits.size(), '0');
    digits.insert(digits.size() - places, ".");
    return (negative ? "-" : "") + digits;
}

Rational abs(const Rational& value) { return value < 0 ? Rational(-value) : value; }

Rational pow(const Rational& base, unsigned exponent) {
    return Rational(boost::multiprecision::pow(boost::multiprecision::numerator(base), exponent),
                    boost::multiprecision::pow(boost::multiprecision::denominator(base), exponent));
}

std::uint64_t scaled_threshold(const Rational& probability) {
    if (probability <= 0) return 0;
    if (probability >= 1) return std::numeric_limits<std::uint64_t>::max();
    const BigInt two64 = BigInt(1) << 64;
    const BigInt scaled = boost::multiprecision::numerator(probability) * two64 /
                          boost::multiprecision::denominator(probability);
    return scaled.convert_to<std::uint64_t>();
}

} // namespace convlab
