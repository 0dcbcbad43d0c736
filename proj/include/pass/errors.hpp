#pragma once

#include <stdexcept>
#include <string>

namespace pass {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateGeometry : Error { using Error::Error; };
struct OutOfSegment : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };
struct InfeasibleRates : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace pass
