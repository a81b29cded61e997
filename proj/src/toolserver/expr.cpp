#include "arena/toolserver/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "arena/core/error.hpp"

namespace arena::toolserver {

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    double parse() {
        double v = expression();
        skip_ws();
        if (pos_ != text_.size()) {
            fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        }
        return v;
    }

private:
    // expression := term (('+' | '-') term)*
    double expression() {
        double v = term();
        while (true) {
            char op = peek();
            if (op != '+' && op != '-') {
                return v;
            }
            ++pos_;
            double rhs = term();
            v = op == '+' ? v + rhs : v - rhs;
            check_finite(v);
        }
    }

    // term := unary (('*' | '/') unary)*
    double term() {
        double v = unary();
        while (true) {
            char op = peek();
            if (op != '*' && op != '/') {
                return v;
            }
            std::size_t at = pos_++;
            double rhs = unary();
            if (op == '/') {
                if (rhs == 0.0) {
                    throw Error(Errc::division_by_zero, "division by zero at position " + std::to_string(at));
                }
                v /= rhs;
            } else {
                v *= rhs;
            }
            check_finite(v);
        }
    }

    // unary := '-' unary | power
    double unary() {
        if (peek() == '-') {
            ++pos_;
            return -unary();
        }
        return power();
    }

    // power := primary ('^' unary)?
    double power() {
        double base = primary();
        if (peek() != '^') {
            return base;
        }
        ++pos_;
        double exponent = unary();
        double v = std::pow(base, exponent);
        check_finite(v);
        return v;
    }

    // primary := number | '(' expression ')'
    double primary() {
        char c = peek();
        if (c == '(') {
            if (++depth_ > kMaxDepth) {
                fail("nesting too deep");
            }
            ++pos_;
            double v = expression();
            if (peek() != ')') {
                fail("expected ')'");
            }
            ++pos_;
            --depth_;
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return number();
        }
        if (c == '\0') {
            fail("unexpected end of expression");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    double number() {
        std::size_t start = pos_;
        std::size_t digits = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
            ++digits;
        }
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
                ++digits;
            }
        }
        if (digits == 0) {
            pos_ = start;
            fail("malformed number");
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) {
                ++p;
            }
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                    ++p;
                }
                pos_ = p;
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (ec == std::errc::result_out_of_range) {
            throw Error(Errc::non_finite_result, "literal out of range at position " + std::to_string(start));
        }
        if (ec != std::errc{} || ptr != text_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        return v;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    void check_finite(double v) const {
        if (!std::isfinite(v)) {
            throw Error(Errc::non_finite_result, "result is not a finite number");
        }
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw Error(Errc::parse_error, why + " at position " + std::to_string(pos_));
    }

    static constexpr int kMaxDepth = 256;

    std::string_view text_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

}  // namespace

double eval_expr(std::string_view expr) {
    if (expr.size() > kMaxExpressionLength) {
        throw Error(Errc::parse_error, "expression longer than " + std::to_string(kMaxExpressionLength) +
                                           " characters at position " + std::to_string(kMaxExpressionLength));
    }
    return Parser(expr).parse();
}

}  // namespace arena::toolserver
