#pragma once
/// Exception types raised by the simulator. Every message has the form
/// "Module: message".
#include <stdexcept>
#include <string>

namespace bdfp {

/// Base class for all simulator failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define BDFP_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(what) {}   \
    };

BDFP_DEFINE_ERROR(EvaluationFailure)
BDFP_DEFINE_ERROR(InversionFailure)
BDFP_DEFINE_ERROR(DivergentIntegral)
BDFP_DEFINE_ERROR(BracketFailure)
BDFP_DEFINE_ERROR(PositivityViolation)
BDFP_DEFINE_ERROR(PositivityLoss)
BDFP_DEFINE_ERROR(MassDrift)
BDFP_DEFINE_ERROR(DivergentSum)
BDFP_DEFINE_ERROR(InvalidTheta)
BDFP_DEFINE_ERROR(InsufficientData)
BDFP_DEFINE_ERROR(NonPositiveEnergy)
BDFP_DEFINE_ERROR(ConfigError)

#undef BDFP_DEFINE_ERROR

}  // namespace bdfp
