/*
   Copyright 2026 The fluctx Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "fluctx/observables.hpp"

#include <cctype>
#include <charconv>
#include <mutex>
#include <sstream>

namespace fluctx {

struct Observable::Memo {
    explicit Memo(int max_order)
        : once(std::make_unique<std::once_flag[]>(static_cast<std::size_t>(max_order) + 1)),
          tensors(static_cast<std::size_t>(max_order) + 1) {}

    std::unique_ptr<std::once_flag[]> once;
    std::vector<std::vector<TensorEntry>> tensors;
};

Observable::Observable(std::size_t dim, std::map<MultiIndex, double> terms) : dim_(dim) {
    if (dim == 0) throw DimensionMismatch("observable dimension must be positive");
    for (auto& [alpha, c] : terms) {
        if (alpha.size() != dim) throw DimensionMismatch("exponent multi-index has wrong length");
        for (int a : alpha)
            if (a < 0) throw std::invalid_argument("negative exponent");
        if (c == 0.0) continue;
        int deg = 0;
        for (int a : alpha) deg += a;
        max_degree_ = std::max(max_degree_, deg);
        terms_.emplace(alpha, c);
    }
    memo_ = std::make_shared<Memo>(max_degree_);
}

Observable Observable::constant(std::size_t dim, double c) {
    return Observable(dim, {{MultiIndex(dim, 0), c}});
}

Observable Observable::coordinate(std::size_t dim, std::size_t axis) {
    MultiIndex alpha(dim, 0);
    alpha.at(axis) = 1;
    return Observable(dim, {{alpha, 1.0}});
}

Observable Observable::monomial(std::size_t dim, MultiIndex exponents, double coeff) {
    return Observable(dim, {{std::move(exponents), coeff}});
}

double Observable::eval_terms(std::span<const Term> poly, std::span<const double> x) {
    double sum = 0.0;
    for (const Term& t : poly) {
        double prod = t.coeff;
        for (std::size_t j = 0; j < t.exponents.size(); ++j)
            for (int p = 0; p < t.exponents[j]; ++p) prod *= x[j];
        sum += prod;
    }
    return sum;
}

double Observable::eval(std::span<const double> x) const {
    if (x.size() != dim_) throw DimensionMismatch("observable evaluated at point of wrong dimension");
    double sum = 0.0;
    for (const auto& [alpha, c] : terms_) {
        double prod = c;
        for (std::size_t j = 0; j < alpha.size(); ++j)
            for (int p = 0; p < alpha[j]; ++p) prod *= x[j];
        sum += prod;
    }
    return sum;
}

double Observable::eval(const StateVector& x) const { return eval(x.coords()); }

const std::vector<Observable::TensorEntry>& Observable::tensor(int order) const {
    static const std::vector<TensorEntry> empty;
    if (order < 0 || order > max_degree_ || !memo_) return empty;
    const auto slot = static_cast<std::size_t>(order);
    std::call_once(memo_->once[slot], [&] {
        std::vector<TensorEntry> out;
        if (order == 0) {
            TensorEntry e;
            for (const auto& [alpha, c] : terms_) e.poly.push_back({alpha, c});
            out.push_back(std::move(e));
        } else {
            for (const TensorEntry& lower : tensor(order - 1)) {
                for (std::size_t axis = 0; axis < dim_; ++axis) {
                    TensorEntry e;
                    e.axes = lower.axes;
                    e.axes.push_back(static_cast<int>(axis));
                    for (const Term& t : lower.poly) {
                        if (t.exponents[axis] == 0) continue;
                        Term d = t;
                        d.coeff *= t.exponents[axis];
                        d.exponents[axis] -= 1;
                        e.poly.push_back(std::move(d));
                    }
                    if (!e.poly.empty()) out.push_back(std::move(e));
                }
            }
        }
        memo_->tensors[slot] = std::move(out);
    });
    return memo_->tensors[slot];
}

double Observable::apply_derivative(int order, std::span<const double> x,
                                    std::span<const std::span<const double>> vs) const {
    if (order < 0) throw std::invalid_argument("negative derivative order");
    if (vs.size() != static_cast<std::size_t>(order))
        throw DimensionMismatch("number of slot vectors must equal the derivative order");
    if (x.size() != dim_) throw DimensionMismatch("base point has wrong dimension");
    for (const auto& v : vs)
        if (v.size() != dim_) throw DimensionMismatch("slot vector has wrong dimension");

    double sum = 0.0;
    for (const TensorEntry& e : tensor(order)) {
        double slots = 1.0;
        for (std::size_t k = 0; k < e.axes.size(); ++k)
            slots *= vs[k][static_cast<std::size_t>(e.axes[k])];
        if (slots == 0.0) continue;
        sum += slots * eval_terms(e.poly, x);
    }
    return sum;
}

double Observable::apply_derivative(int order, const StateVector& x,
                                    std::span<const StateVector> vs) const {
    std::vector<std::span<const double>> raw;
    raw.reserve(vs.size());
    for (const StateVector& v : vs) raw.push_back(v.coords());
    return apply_derivative(order, x.coords(), raw);
}

double Observable::scalar_derivative(int order, double x) const {
    if (dim_ != 1) throw DimensionMismatch("scalar_derivative requires d = 1");
    const double one = 1.0;
    std::vector<std::span<const double>> slots(static_cast<std::size_t>(std::max(order, 0)),
                                               std::span<const double>(&one, 1));
    return apply_derivative(order, std::span<const double>(&x, 1), slots);
}

Observable Observable::partial(std::size_t axis) const {
    if (axis >= dim_) throw DimensionMismatch("partial: axis out of range");
    std::map<MultiIndex, double> out;
    for (const auto& [alpha, c] : terms_) {
        if (alpha[axis] == 0) continue;
        MultiIndex beta = alpha;
        beta[axis] -= 1;
        out[beta] += c * alpha[axis];
    }
    return Observable(dim_, std::move(out));
}

Observable operator+(const Observable& a, const Observable& b) {
    if (a.dim_ != b.dim_) throw DimensionMismatch("sum of observables of different dimension");
    std::map<MultiIndex, double> out = a.terms_;
    for (const auto& [alpha, c] : b.terms_) out[alpha] += c;
    return Observable(a.dim_, std::move(out));
}

Observable operator*(double s, const Observable& a) {
    std::map<MultiIndex, double> out = a.terms_;
    for (auto& [alpha, c] : out) c *= s;
    return Observable(a.dim_, std::move(out));
}

std::string Observable::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [alpha, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << c;
        for (std::size_t j = 0; j < alpha.size(); ++j) {
            if (alpha[j] == 0) continue;
            os << " * x" << (j + 1);
            if (alpha[j] != 1) os << '^' << alpha[j];
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Literal parser

namespace {

class LiteralParser {
public:
    explicit LiteralParser(std::string_view text) : text_(text) {}

    struct RawTerm {
        double coeff = 1.0;
        std::map<std::size_t, int> powers;  // 0-based axis -> exponent
    };

    std::vector<RawTerm> parse() {
        std::vector<RawTerm> out;
        skip_ws();
        if (at_end()) throw ParseError("empty polynomial literal", pos_);
        double sign = read_sign(/*required=*/false);
        while (true) {
            RawTerm t = parse_term();
            t.coeff *= sign;
            out.push_back(std::move(t));
            skip_ws();
            if (at_end()) break;
            sign = read_sign(/*required=*/true);
        }
        return out;
    }

    std::size_t max_axis_seen() const { return max_axis_; }

    /// Offset of the first variable whose index exceeds `dim`.
    std::size_t first_out_of_range(std::size_t dim) const {
        for (const auto& [index, at] : var_positions_)
            if (index > dim) return at;
        return 0;
    }

private:
    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    double read_sign(bool required) {
        skip_ws();
        double sign = 1.0;
        bool seen = false;
        while (!at_end() && (peek() == '+' || peek() == '-')) {
            if (peek() == '-') sign = -sign;
            seen = true;
            ++pos_;
            skip_ws();
        }
        if (required && !seen) throw ParseError("expected '+' or '-' between terms", pos_);
        return sign;
    }

    RawTerm parse_term() {
        RawTerm t;
        parse_factor(t);
        while (true) {
            skip_ws();
            if (at_end() || peek() != '*') break;
            ++pos_;
            parse_factor(t);
        }
        return t;
    }

    void parse_factor(RawTerm& t) {
        skip_ws();
        if (at_end()) throw ParseError("unexpected end of polynomial literal", pos_);
        const char c = peek();
        if (c == 'x' || c == 'X') {
            const std::size_t start = pos_;
            ++pos_;
            std::size_t index = 1;
            if (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
                index = read_unsigned();
                if (index == 0) throw ParseError("variable indices start at 1", start + 1);
            }
            int power = 1;
            skip_ws();
            if (!at_end() && peek() == '^') {
                ++pos_;
                skip_ws();
                if (at_end() || !std::isdigit(static_cast<unsigned char>(peek())))
                    throw ParseError("expected non-negative integer exponent", pos_);
                power = static_cast<int>(read_unsigned());
            }
            max_axis_ = std::max(max_axis_, index);
            var_positions_.emplace_back(index, start);
            t.powers[index - 1] += power;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            t.coeff *= read_number();
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    std::size_t read_unsigned() {
        std::size_t value = 0;
        const auto* first = text_.data() + pos_;
        const auto* last = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc()) throw ParseError("invalid integer", pos_);
        pos_ += static_cast<std::size_t>(ptr - first);
        return value;
    }

    double read_number() {
        double value = 0.0;
        const auto* first = text_.data() + pos_;
        const auto* last = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc()) throw ParseError("invalid number", pos_);
        pos_ += static_cast<std::size_t>(ptr - first);
        return value;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t max_axis_ = 1;
    std::vector<std::pair<std::size_t, std::size_t>> var_positions_;
};

}  // namespace

Observable Observable::parse(std::string_view literal, std::size_t dim) {
    LiteralParser parser(literal);
    auto raw = parser.parse();
    if (dim == 0) dim = parser.max_axis_seen();
    if (parser.max_axis_seen() > dim)
        throw ParseError("variable index exceeds dimension " + std::to_string(dim),
                         parser.first_out_of_range(dim));
    std::map<MultiIndex, double> terms;
    for (const auto& t : raw) {
        MultiIndex alpha(dim, 0);
        for (const auto& [axis, p] : t.powers) alpha[axis] += p;
        terms[alpha] += t.coeff;
    }
    return Observable(dim, std::move(terms));
}

}  // namespace fluctx
