// weight.cpp
#include "treeproj/weight.hpp"

#include "treeproj/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <unordered_map>

namespace treeproj {

using boost::multiprecision::cpp_int;

const char* operator_name(OperatorKind op) {
    switch (op) {
    case OperatorKind::Sum:
        return "sum";
    case OperatorKind::Product:
        return "product";
    case OperatorKind::Min:
        return "min";
    }
    return "?";
}

OperatorKind operator_from_name(const std::string& name) {
    if (name == "sum" || name == "+")
        return OperatorKind::Sum;
    if (name == "product" || name == "*")
        return OperatorKind::Product;
    if (name == "min")
        return OperatorKind::Min;
    throw SchemaError("unknown operator: " + name);
}

bool Weight::operator<(const Weight& o) const {
    if (kind_ != o.kind_) {
        auto rank = [](Kind k) { return k == Kind::Bottom ? 0 : (k == Kind::Finite ? 1 : 2); };
        return rank(kind_) < rank(o.kind_);
    }
    if (kind_ == Kind::Finite)
        return value_ < o.value_;
    return false;
}

std::string Weight::to_token() const {
    switch (kind_) {
    case Kind::Bottom:
        return "%bot%";
    case Kind::PosInf:
        return "%inf%";
    case Kind::Finite:
        return rational_to_string(value_);
    }
    return "%bot%";
}

Weight Weight::from_token(const std::string& token) {
    if (token == "%bot%")
        return bottom();
    if (token == "%inf%")
        return pos_inf();
    return finite(parse_rational(token));
}

Weight Weight::negated() const {
    if (kind_ != Kind::Finite)
        return *this;
    return finite(-value_);
}

Weight apply(OperatorKind op, const Weight& a, const Weight& b) {
    if (a.is_bottom() || b.is_bottom())
        return Weight::bottom();
    if (a.kind() == Weight::Kind::PosInf || b.kind() == Weight::Kind::PosInf) {
        if (op == OperatorKind::Min)
            return a.kind() == Weight::Kind::PosInf ? b : a;
        return Weight::pos_inf();
    }
    switch (op) {
    case OperatorKind::Sum:
        return Weight::finite(a.value() + b.value());
    case OperatorKind::Product:
        return Weight::finite(a.value() * b.value());
    case OperatorKind::Min:
        return a.value() <= b.value() ? a : b;
    }
    return Weight::bottom();
}

Weight neutral(OperatorKind op) {
    switch (op) {
    case OperatorKind::Sum:
        return Weight::finite(0);
    case OperatorKind::Product:
        return Weight::finite(1);
    case OperatorKind::Min:
        return Weight::pos_inf();
    }
    return Weight::bottom();
}

Weight weight_max(const Weight& a, const Weight& b) { return a < b ? b : a; }
Weight weight_min(const Weight& a, const Weight& b) { return a < b ? a : b; }

Rational parse_rational(const std::string& text) {
    if (text.empty())
        throw NonNumericToken("empty weight token");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        try {
            cpp_int num(text.substr(0, slash));
            cpp_int den(text.substr(slash + 1));
            if (den == 0)
                throw NonNumericToken("zero denominator: " + text);
            return Rational(num, den);
        } catch (const std::exception&) {
            throw NonNumericToken("bad fraction token: " + text);
        }
    }
    std::string digits = text;
    bool negative = false;
    size_t pos = 0;
    if (pos < digits.size() && (digits[pos] == '-' || digits[pos] == '+')) {
        negative = digits[pos] == '-';
        ++pos;
    }
    std::string intpart, fracpart;
    bool dot_seen = false;
    for (; pos < digits.size(); ++pos) {
        char c = digits[pos];
        if (c == '.') {
            if (dot_seen)
                throw NonNumericToken("bad decimal token: " + text);
            dot_seen = true;
        } else if (c >= '0' && c <= '9') {
            (dot_seen ? fracpart : intpart).push_back(c);
        } else {
            throw NonNumericToken("bad decimal token: " + text);
        }
    }
    if (intpart.empty() && fracpart.empty())
        throw NonNumericToken("bad decimal token: " + text);
    cpp_int num = intpart.empty() ? cpp_int(0) : cpp_int(intpart);
    cpp_int den = 1;
    for (char c : fracpart) {
        num = num * 10 + (c - '0');
        den *= 10;
    }
    Rational r(num, den);
    return negative ? -r : r;
}

std::string rational_to_string(const Rational& r) {
    cpp_int num = boost::multiprecision::numerator(r);
    cpp_int den = boost::multiprecision::denominator(r);
    if (den == 1)
        return num.str();
    // exact decimal when den = 2^a * 5^b
    cpp_int d = den;
    int twos = 0, fives = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++twos;
    }
    while (d % 5 == 0) {
        d /= 5;
        ++fives;
    }
    if (d == 1) {
        int digits = std::max(twos, fives);
        cpp_int scale = 1;
        for (int i = 0; i < digits; ++i)
            scale *= 10;
        cpp_int scaled = num * scale / den;
        bool neg = scaled < 0;
        if (neg)
            scaled = -scaled;
        std::string s = scaled.str();
        if (static_cast<int>(s.size()) <= digits)
            s.insert(0, static_cast<size_t>(digits) + 1 - s.size(), '0');
        s.insert(s.size() - static_cast<size_t>(digits), ".");
        return (neg ? "-" : "") + s;
    }
    return num.str() + "/" + den.str();
}

Weight weight_from_tok(Tok t) {
    // parse cache: weight tokens repeat heavily inside solver relations
    static std::unordered_map<Tok, Weight> cache;
    auto it = cache.find(t);
    if (it != cache.end())
        return it->second;
    Weight w = Weight::from_token(tok_str(t));
    cache.emplace(t, w);
    return w;
}

} // namespace treeproj
