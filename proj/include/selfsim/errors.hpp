#pragma once

#include <stdexcept>
#include <string>

namespace selfsim {

// Domain-level error conditions. Every failure mode of the public operations
// maps to one of these so callers can dispatch on the condition, not on
// message strings.

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ParameterOutOfRange : Error {
    using Error::Error;
};

struct QuadratureFailure : Error {
    using Error::Error;
};

// moment(): density decays too slowly against the requested monomial
struct NonIntegrableMoment : Error {
    using Error::Error;
};

// riesz_transform(): the finiteness condition on |mu| fails
struct RieszDivergence : Error {
    using Error::Error;
};

// pair_energy(): the double integral is predicted infinite
struct EnergyDivergent : Error {
    using Error::Error;
};

// covariance_functional(): measure/kernel admissibility violated
struct PreconditionViolation : Error {
    using Error::Error;
};

// kernel_Kh(): pulse tails fail the admissibility bounds
struct DivergentKernel : Error {
    using Error::Error;
};

struct NotSquareIntegrable : Error {
    using Error::Error;
};

struct BoundaryPoint : Error {
    using Error::Error;
};

struct MethodUnsupported : Error {
    using Error::Error;
};

struct DimensionUnsupported : Error {
    using Error::Error;
};

struct ScaleOutOfDomain : Error {
    using Error::Error;
};

struct TruncationTooCoarse : Error {
    using Error::Error;
};

struct NonAdmissible : Error {
    using Error::Error;
};

struct NotPositiveSemidefinite : Error {
    using Error::Error;
};

}  // namespace selfsim
