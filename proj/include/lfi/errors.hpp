#pragma once

#include <stdexcept>
#include <string>

namespace lfi {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// The evidence sum(prior * likelihood) is zero; no posterior exists.
class DegenerateProblemError : public Error {
public:
    using Error::Error;
};

/// All particle weights are zero; the weighted estimate is undefined.
class ZeroTotalWeightError : public Error {
public:
    using Error::Error;
};

/// A likelihood estimate n_star/n is requested where n = 0.
class UndefinedLikelihoodError : public Error {
public:
    using Error::Error;
};

/// A plug-in posterior normalizer is zero (no acceptances anywhere).
class DegenerateEstimateError : public Error {
public:
    using Error::Error;
};

/// A targeted density is identically zero (constant target function).
class DegenerateTargetError : public Error {
public:
    using Error::Error;
};

/// An integer allocation cannot satisfy the requested constraints.
class InfeasibleAllocationError : public Error {
public:
    using Error::Error;
};

/// A parameter lies outside the problem support.
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace lfi
