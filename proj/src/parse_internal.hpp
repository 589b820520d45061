#pragma once

#include "dlpcf/index.hpp"
#include "lexer.hpp"

namespace dlpcf::detail {

// Parses one index expression starting at the lexer's cursor.
Index parse_index_expr(Lexer& lx);

}  // namespace dlpcf::detail
