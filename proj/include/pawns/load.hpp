// load.hpp
//
// Parse, type check and annotate a program in one step.
#pragma once

#include "pawns/syntax.hpp"

#include <string>
#include <string_view>

namespace pawns {

/// Throws ParseError or TypeError.
Program load_program(std::string_view text);
/// Reads the file first; throws std::runtime_error if it cannot be read.
Program load_program_file(const std::string& path);
std::string read_file(const std::string& path);

} // namespace pawns
