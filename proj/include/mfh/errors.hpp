#pragma once

#include <stdexcept>
#include <string>

namespace mfh {

// Base for all failures raised by the toolkit. ConfigError maps to CLI exit
// code 1, NumericError (and descendants) to exit code 2.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

#define MFH_DEFINE_ERROR(Name)                        \
    struct Name : NumericError {                      \
        explicit Name(const std::string& msg)         \
            : NumericError(std::string(#Name ": ") + msg) {} \
    }

MFH_DEFINE_ERROR(FlowDivergence);
MFH_DEFINE_ERROR(DegenerateEquilibrium);
MFH_DEFINE_ERROR(TailNotConvergent);
MFH_DEFINE_ERROR(GridTooCoarse);
MFH_DEFINE_ERROR(TailBelowFloor);
MFH_DEFINE_ERROR(NoRootInScan);
MFH_DEFINE_ERROR(DomainViolation);
MFH_DEFINE_ERROR(PoleProximity);
MFH_DEFINE_ERROR(WindingInconsistent);
MFH_DEFINE_ERROR(DenominatorVanishes);
MFH_DEFINE_ERROR(SpuriousIntersection);
MFH_DEFINE_ERROR(TransversalityFailed);
MFH_DEFINE_ERROR(ResonanceDetected);
MFH_DEFINE_ERROR(DoeblinFailure);
MFH_DEFINE_ERROR(InverseFlowFailure);
MFH_DEFINE_ERROR(NewtonDiverged);
MFH_DEFINE_ERROR(DegenerateJacobian);
MFH_DEFINE_ERROR(RateExplosion);
MFH_DEFINE_ERROR(SeriesTooShort);

#undef MFH_DEFINE_ERROR

}  // namespace mfh
