#include "pawns/load.hpp"

#include "pawns/liveness.hpp"
#include "pawns/parser.hpp"
#include "pawns/typecheck.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pawns {

Program load_program(std::string_view text) {
    Program p = parse_program(text);
    check_types(p);
    for (auto& f : p.funcs) compute_liveness(f);
    return p;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Program load_program_file(const std::string& path) { return load_program(read_file(path)); }

} // namespace pawns
