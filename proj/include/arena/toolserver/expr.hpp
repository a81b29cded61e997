#pragma once

#include <cstddef>
#include <string_view>

namespace arena::toolserver {

inline constexpr std::size_t kMaxExpressionLength = 4096;

/// Evaluates an arithmetic expression: decimal literals (optional exponent),
/// + - * / ^, unary minus, parentheses. `^` is right-associative and binds
/// tighter than unary minus (-2^2 == -4). Throws Error(parse_error) with the
/// failing offset, Error(division_by_zero), or Error(non_finite_result).
double eval_expr(std::string_view expr);

}  // namespace arena::toolserver
