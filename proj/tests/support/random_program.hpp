// Generator of small well-typed core programs for oracle testing.
#pragma once

#include <random>
#include <string>

namespace pawns::testgen {

struct GenOptions {
    int maxStatements = 12;
    int maxTypes = 3;
};

/// Source text of a program whose entry point is `main()`. The program
/// defines a few helper functions and a `main` of at most
/// `maxStatements` statements over at most `maxTypes` variable types.
std::string random_program(std::mt19937& rng, GenOptions opts = {});

} // namespace pawns::testgen
