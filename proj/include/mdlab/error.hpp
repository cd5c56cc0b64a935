#pragma once

#include <stdexcept>
#include <string>

namespace mdlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KeyOutOfRange : Error { using Error::Error; };
struct PositionOutOfRange : Error { using Error::Error; };
struct EmptyRelation : Error { using Error::Error; };
struct InvalidDensity : Error { using Error::Error; };
struct SchemaOverflow : Error { using Error::Error; };

struct NotStrictlyIncreasing : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct CorruptHeader : Error { using Error::Error; };

struct EmptyAlphabet : Error { using Error::Error; };
struct SymbolNotInCode : Error { using Error::Error; };
struct TruncatedStream : Error { using Error::Error; };

struct InvalidOccupancy : Error { using Error::Error; };
struct InvalidProbability : Error { using Error::Error; };
struct ModelHypothesisViolated : Error { using Error::Error; };
struct DegenerateProfile : Error { using Error::Error; };
struct InsufficientMemory : Error { using Error::Error; };

struct IoError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };

}  // namespace mdlab
