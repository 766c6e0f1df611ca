#pragma once

#include <stdexcept>
#include <string>

namespace regionplan {

/// Broad failure classes. The CLI maps each one to a stable exit code.
enum class ErrorCategory {
    validation = 1,
    planning = 2,
    enumeration_bound = 3,
    simulation = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

#define REGIONPLAN_DEFINE_ERROR(Name, Category)                        \
    class Name : public Error {                                        \
    public:                                                            \
        explicit Name(const std::string& what)                         \
            : Error(ErrorCategory::Category, what) {}                  \
    };

// workflow input
REGIONPLAN_DEFINE_ERROR(ParseError, validation)
REGIONPLAN_DEFINE_ERROR(SchemaError, validation)
REGIONPLAN_DEFINE_ERROR(ValidationError, validation)
REGIONPLAN_DEFINE_ERROR(MissingCost, validation)
REGIONPLAN_DEFINE_ERROR(CostModelError, validation)

// planning
REGIONPLAN_DEFINE_ERROR(NotASource, planning)
REGIONPLAN_DEFINE_ERROR(CyclicRegionGraph, planning)
REGIONPLAN_DEFINE_ERROR(UnschedulableError, planning)
REGIONPLAN_DEFINE_ERROR(EmptyCutSpace, planning)
REGIONPLAN_DEFINE_ERROR(UnknownLink, planning)
REGIONPLAN_DEFINE_ERROR(NotPipelined, planning)
REGIONPLAN_DEFINE_ERROR(MultipleResultOperators, planning)

REGIONPLAN_DEFINE_ERROR(CutSpaceTooLarge, enumeration_bound)

REGIONPLAN_DEFINE_ERROR(DeadlockDetected, simulation)

#undef REGIONPLAN_DEFINE_ERROR

} // namespace regionplan
