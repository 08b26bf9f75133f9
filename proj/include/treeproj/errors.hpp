// errors.hpp - exception types shared across the engine
#pragma once

#include <stdexcept>
#include <string>

namespace treeproj {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleTooLarge : Error {
    using Error::Error;
};
struct BudgetExceeded : Error {
    using Error::Error;
};
struct ParameterBudgetExceeded : Error {
    using Error::Error;
};
struct NotAcyclic : Error {
    using Error::Error;
};
struct UncoveredAtom : Error {
    using Error::Error;
};
struct UncoveredFunction : Error {
    using Error::Error;
};
struct NotGloballyConsistent : Error {
    using Error::Error;
};
struct PreconditionViolated : Error {
    using Error::Error;
};
struct UnboundVariable : Error {
    using Error::Error;
};
struct NonNumericToken : Error {
    using Error::Error;
};
struct NoSolutionError : Error {
    using Error::Error;
};

// Raised by svf_from_tree_projection when a required covering hyperedge is
// missing: 'a' = no hyperedge covers the output variables, 'b' = some weight
// function is uncovered.
struct ConditionFailed : Error {
    ConditionFailed(char which_, const std::string& msg) : Error(msg), which(which_) {}
    char which;
};

struct ParseError : Error {
    using Error::Error;
};
struct SchemaError : Error {
    using Error::Error;
};

} // namespace treeproj
