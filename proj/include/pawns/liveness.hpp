// liveness.hpp
#pragma once

#include "pawns/syntax.hpp"

namespace pawns {

/// Variables read by a statement (excluding nested statements and constants).
std::set<std::string> stat_uses(const Stat& s);

/// Backward may-use liveness. Fills f.liveAt for every program point; the
/// set at point p holds the variables live just after the statement that
/// ends at p. Parameters are live everywhere and the result is live at the end.
void compute_liveness(FuncDef& f);

} // namespace pawns
