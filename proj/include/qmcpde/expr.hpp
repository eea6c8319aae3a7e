#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qmcpde {

class ExprError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parses an arithmetic expression in one free variable, e.g.
/// "0.1 * j**-3 / log(j+1)" with variable "j". Supports + - * / ** ^,
/// parentheses, the constants pi and e, and the functions sqrt, exp, log,
/// sin, cos, abs.
std::function<double(double)> compile_expression(std::string_view text,
                                                 std::string_view variable);

/// Constant expression such as "1/128" or "2**-7".
double evaluate_constant(std::string_view text);

} // namespace qmcpde
