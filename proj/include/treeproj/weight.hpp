// weight.hpp - exact weight domain and the binary operators of valuation functions
#pragma once

#include "treeproj/interner.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace treeproj {

using Rational = boost::multiprecision::cpp_rational;

enum class OperatorKind { Sum, Product, Min };

const char* operator_name(OperatorKind op);
OperatorKind operator_from_name(const std::string& name);

/// Totally ordered weight: Bottom < every rational < PosInf. Bottom is the
/// absorbing "no extension" element; PosInf only appears as the neutral
/// element of Min in the parallel algorithms.
class Weight {
public:
    enum class Kind { Bottom, Finite, PosInf };

    Weight() : kind_(Kind::Bottom) {}
    static Weight bottom() { return Weight(); }
    static Weight pos_inf() {
        Weight w;
        w.kind_ = Kind::PosInf;
        return w;
    }
    static Weight finite(Rational v) {
        Weight w;
        w.kind_ = Kind::Finite;
        w.value_ = std::move(v);
        return w;
    }

    Kind kind() const { return kind_; }
    bool is_bottom() const { return kind_ == Kind::Bottom; }
    bool is_finite() const { return kind_ == Kind::Finite; }
    const Rational& value() const { return value_; }

    bool operator==(const Weight& o) const { return kind_ == o.kind_ && value_ == o.value_; }
    bool operator!=(const Weight& o) const { return !(*this == o); }
    bool operator<(const Weight& o) const;
    bool operator<=(const Weight& o) const { return *this < o || *this == o; }
    bool operator>(const Weight& o) const { return o < *this; }
    bool operator>=(const Weight& o) const { return o <= *this; }

    /// Canonical token, parseable by from_token. Finite weights use the exact
    /// decimal form when the denominator is 2^a*5^b, "p/q" otherwise.
    std::string to_token() const;
    static Weight from_token(const std::string& token);

    Weight negated() const;

private:
    Kind kind_;
    Rational value_;
};

/// x (+) Bottom = Bottom for every operator; PosInf is Min's neutral element.
Weight apply(OperatorKind op, const Weight& a, const Weight& b);
/// Neutral element: Sum -> 0, Product -> 1, Min -> PosInf.
Weight neutral(OperatorKind op);
Weight weight_max(const Weight& a, const Weight& b);
Weight weight_min(const Weight& a, const Weight& b);

/// Parse a decimal string ("-3.25", "7") or a fraction ("3/4") to an exact rational.
Rational parse_rational(const std::string& text);
std::string rational_to_string(const Rational& r);

inline Tok weight_tok(const Weight& w) { return tok(w.to_token()); }
Weight weight_from_tok(Tok t);

} // namespace treeproj
