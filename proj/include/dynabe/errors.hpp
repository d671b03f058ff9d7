#pragma once

#include <stdexcept>
#include <string>

namespace dynabe {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Calendar alignment produced an unusable result (e.g. empty date intersection).
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Column names, shapes, or date ranges do not line up.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Invalid values in the data itself (non-finite, non-positive prices, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// A parameter is outside its documented range.
class ParamError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// The target is unusable: constant labels or a missing class.
class DegenerateTargetError : public Error {
public:
    using Error::Error;
};

/// An iterative fit did not reach its tolerance within the iteration cap.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double residual)
        : Error(msg), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// A multi-stage computation failed; the message names the stage.
class PipelineError : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

/// A persisted artifact does not match its recorded checksum.
class IntegrityError : public Error {
public:
    using Error::Error;
};

}  // namespace dynabe
