// parser.hpp
//
// Reader for `.pcore` source text.
#pragma once

#include "pawns/syntax.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace pawns {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, SourcePos pos);
    SourcePos pos;
};

/// Parse a whole program. Types are not checked; see check_types.
Program parse_program(std::string_view text);

/// Parse a type expression on its own, e.g. `Ref (List Int)`.
TypePtr parse_type(std::string_view text);

/// Parse the set-of-sets notation `{{x.[Cons.1], y.[]}, {z.[Ref.1]}}`.
std::vector<std::vector<CondVarComp>> parse_cliques(std::string_view text);

} // namespace pawns
