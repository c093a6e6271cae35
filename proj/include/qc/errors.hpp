#pragma once
#include <stdexcept>
#include <string>

namespace qc {

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define QC_ERROR_TYPE(Name)                                                  \
    struct Name : Error {                                                    \
        explicit Name(const std::string& msg) : Error(#Name, msg) {}         \
    };

QC_ERROR_TYPE(DegenerateRank)
QC_ERROR_TYPE(SingularSystem)
QC_ERROR_TYPE(NonOrthonormalFrame)
QC_ERROR_TYPE(UnsupportedModel)
QC_ERROR_TYPE(NoConvergence)
QC_ERROR_TYPE(OutOfRange)
QC_ERROR_TYPE(TailDominates)
QC_ERROR_TYPE(UnsupportedSymbol)
QC_ERROR_TYPE(TruncationOverflow)
QC_ERROR_TYPE(NonInvertibleRho)
QC_ERROR_TYPE(ResonanceLeak)
QC_ERROR_TYPE(NonTerminatingSeries)
QC_ERROR_TYPE(StepFailure)
QC_ERROR_TYPE(ConfigError)

#undef QC_ERROR_TYPE

}  // namespace qc
