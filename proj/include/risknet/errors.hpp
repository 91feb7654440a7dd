#ifndef RISKNET_ERRORS_HPP_
#define RISKNET_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace risknet {

// Validation errors are caller mistakes (bad arguments, bad shapes);
// numerical errors mean the input is well formed but the requested
// mathematical object does not exist or could not be computed.
enum class ErrorCategory { validation, numerical };

class Error : public std::runtime_error {
public:
    Error(std::string kind, ErrorCategory category, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)), category_(category) {}

    const std::string& kind() const noexcept { return kind_; }
    ErrorCategory category() const noexcept { return category_; }

private:
    std::string kind_;
    ErrorCategory category_;
};

#define RISKNET_DEFINE_ERROR(Name, Category)                                   \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what)                                 \
            : Error(#Name, ErrorCategory::Category, what) {}                   \
    }

RISKNET_DEFINE_ERROR(InvalidArgument, validation);
RISKNET_DEFINE_ERROR(DimensionMismatch, validation);
RISKNET_DEFINE_ERROR(InvalidSpec, validation);
RISKNET_DEFINE_ERROR(InvalidRule, validation);
RISKNET_DEFINE_ERROR(RhoOutOfRange, validation);
RISKNET_DEFINE_ERROR(NonPositiveWeight, validation);
RISKNET_DEFINE_ERROR(EmptyInput, validation);

RISKNET_DEFINE_ERROR(NoTotalSupport, numerical);
RISKNET_DEFINE_ERROR(ZeroLine, numerical);
RISKNET_DEFINE_ERROR(NotDoublyStochastic, numerical);
RISKNET_DEFINE_ERROR(NotRowStochastic, numerical);
RISKNET_DEFINE_ERROR(NotSymmetric, numerical);
RISKNET_DEFINE_ERROR(MatchingFailure, numerical);
RISKNET_DEFINE_ERROR(NotMajorized, numerical);
RISKNET_DEFINE_ERROR(IsolatedNode, numerical);
RISKNET_DEFINE_ERROR(RegularGenerationFailure, numerical);

#undef RISKNET_DEFINE_ERROR

}  // namespace risknet

#endif  // RISKNET_ERRORS_HPP_
