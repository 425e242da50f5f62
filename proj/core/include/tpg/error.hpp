#pragma once

#include <stdexcept>
#include <string>

namespace tpg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StepAfterDone : Error {
    StepAfterDone() : Error("step called on a terminated episode") {}
};

struct InsufficientData : Error {
    using Error::Error;
};

struct DegenerateBaseline : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

/// Malformed or unreadable persisted data (checkpoints, traces).
struct DataError : Error {
    using Error::Error;
};

struct UnknownChampion : DataError {
    using DataError::DataError;
};

struct UnknownTask : DataError {
    using DataError::DataError;
};

struct MissingTraces : DataError {
    using DataError::DataError;
};

} // namespace tpg
