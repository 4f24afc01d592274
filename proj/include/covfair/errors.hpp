#pragma once

#include <stdexcept>
#include <string>

namespace covfair {

// Every failure raised by the library derives from Error. The category drives
// CLI exit codes: configuration problems, undefined measures and provider
// transport failures are reported differently.
enum class ErrorCategory {
    Input,        // malformed or invalid data files
    Configuration,
    Measure,      // a measure is undefined for the given input
    Transport,    // remote provider unreachable or failing
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

#define COVFAIR_DEFINE_ERROR(Name, Category)                               \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(Category, what) {}  \
    }

COVFAIR_DEFINE_ERROR(ParseError, ErrorCategory::Input);
COVFAIR_DEFINE_ERROR(SchemaError, ErrorCategory::Input);
COVFAIR_DEFINE_ERROR(ValidationError, ErrorCategory::Input);
COVFAIR_DEFINE_ERROR(RangeError, ErrorCategory::Input);
COVFAIR_DEFINE_ERROR(DimensionError, ErrorCategory::Input);
COVFAIR_DEFINE_ERROR(LookupError, ErrorCategory::Input);
COVFAIR_DEFINE_ERROR(ConfigError, ErrorCategory::Configuration);
COVFAIR_DEFINE_ERROR(PreconditionError, ErrorCategory::Measure);
COVFAIR_DEFINE_ERROR(UndefinedMeasureError, ErrorCategory::Measure);
COVFAIR_DEFINE_ERROR(AbsentValueError, ErrorCategory::Measure);
COVFAIR_DEFINE_ERROR(CoverageError, ErrorCategory::Measure);
COVFAIR_DEFINE_ERROR(InsufficientPoolError, ErrorCategory::Input);
COVFAIR_DEFINE_ERROR(DecompositionError, ErrorCategory::Transport);
COVFAIR_DEFINE_ERROR(TransportError, ErrorCategory::Transport);

#undef COVFAIR_DEFINE_ERROR

}  // namespace covfair
