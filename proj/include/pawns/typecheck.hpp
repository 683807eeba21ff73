// typecheck.hpp
//
// Type inference for core programs, plus typing of condition statements.
#pragma once

#include "pawns/syntax.hpp"

namespace pawns {

/// Check every function, fill FuncDef::varTypes and Stat::calleeType, and
/// resolve `App` argument lists against callee arities. Throws TypeError.
void check_types(Program& program);

/// Type of a known function as a first-class value.
TypePtr function_type(const FuncDef& f);

/// Types of the variables of one condition. `formalTypes` and `resultType`
/// give the instance at which the signature is used; condition locals are
/// inferred, defaulting to `()` when unconstrained. Throws TypeError.
std::map<std::string, TypePtr> cond_var_types(const TypeEnv& env, const SharingSig& sig,
                                              const CondForm& cond,
                                              const std::vector<TypePtr>& formalTypes,
                                              const TypePtr& resultType);

} // namespace pawns
