#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msnet {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct InvalidSpec : Error {
    using Error::Error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct NonFinite : Error {
    using Error::Error;
};

// Carries the node ids of one offending cycle.
struct CyclicGraph : Error {
    std::vector<int> cycle;
    CyclicGraph(std::string msg, std::vector<int> cycle_nodes)
        : Error(std::move(msg)), cycle(std::move(cycle_nodes)) {}
};

struct IoError : Error {
    using Error::Error;
};

struct BadMagic : IoError {
    using IoError::IoError;
};

struct TruncatedFile : IoError {
    using IoError::IoError;
};

struct VersionUnsupported : IoError {
    using IoError::IoError;
};

struct EmptyConfusion : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace msnet
