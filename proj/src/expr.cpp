#include "qmcpde/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

namespace qmcpde {

namespace {

using Fn = std::function<double(double)>;

class Parser {
public:
    Parser(std::string_view text, std::string_view var) : s_(text), var_(var) {}

    Fn parse() {
        Fn f = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(s_.substr(pos_)) + "'");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ExprError("expression '" + std::string(s_) + "': " + msg);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(std::string_view tok) {
        skip();
        if (s_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    Fn expr() {
        Fn lhs = term();
        while (true) {
            if (eat("+")) {
                Fn rhs = term();
                lhs = [lhs, rhs](double v) { return lhs(v) + rhs(v); };
            } else if (eat("-")) {
                Fn rhs = term();
                lhs = [lhs, rhs](double v) { return lhs(v) - rhs(v); };
            } else {
                return lhs;
            }
        }
    }

    Fn term() {
        Fn lhs = unary();
        while (true) {
            skip();
            if (s_.substr(pos_, 2) == "**") return lhs;  // handled in power()
            if (eat("*")) {
                Fn rhs = unary();
                lhs = [lhs, rhs](double v) { return lhs(v) * rhs(v); };
            } else if (eat("/")) {
                Fn rhs = unary();
                lhs = [lhs, rhs](double v) { return lhs(v) / rhs(v); };
            } else {
                return lhs;
            }
        }
    }

    Fn unary() {
        if (eat("-")) {
            Fn f = unary();
            return [f](double v) { return -f(v); };
        }
        if (eat("+")) return unary();
        return power();
    }

    // Right-associative; the exponent may carry its own sign (j**-3).
    Fn power() {
        Fn base = primary();
        if (eat("**") || eat("^")) {
            Fn ex = unary();
            return [base, ex](double v) { return std::pow(base(v), ex(v)); };
        }
        return base;
    }

    Fn primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        if (eat("(")) {
            Fn f = expr();
            if (!eat(")")) fail("missing ')'");
            return f;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double val = 0.0;
            const auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), val);
            if (ec != std::errc{}) fail("bad number");
            pos_ = static_cast<std::size_t>(ptr - s_.data());
            return [val](double) { return val; };
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const auto start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            const auto name = s_.substr(start, pos_ - start);
            if (eat("(")) {
                Fn arg = expr();
                if (!eat(")")) fail("missing ')' after argument of " + std::string(name));
                return apply(name, arg);
            }
            if (!var_.empty() && name == var_) return [](double v) { return v; };
            if (name == "pi") return [](double) { return std::numbers::pi; };
            if (name == "e") return [](double) { return std::numbers::e; };
            fail("unknown name '" + std::string(name) + "'");
        }
        fail(std::string("unexpected '") + c + "'");
    }

    Fn apply(std::string_view name, Fn arg) {
        double (*fn)(double) = nullptr;
        if (name == "sqrt") fn = [](double x) { return std::sqrt(x); };
        else if (name == "exp") fn = [](double x) { return std::exp(x); };
        else if (name == "log") fn = [](double x) { return std::log(x); };
        else if (name == "sin") fn = [](double x) { return std::sin(x); };
        else if (name == "cos") fn = [](double x) { return std::cos(x); };
        else if (name == "abs") fn = [](double x) { return std::fabs(x); };
        else fail("unknown function '" + std::string(name) + "'");
        return [fn, arg](double v) { return fn(arg(v)); };
    }

    std::string_view s_;
    std::string_view var_;
    std::size_t pos_ = 0;
};

} // namespace

std::function<double(double)> compile_expression(std::string_view text,
                                                 std::string_view variable) {
    return Parser(text, variable).parse();
}

double evaluate_constant(std::string_view text) {
    return Parser(text, {}).parse()(0.0);
}

} // namespace qmcpde
