#pragma once

#include <stdexcept>
#include <string>

namespace rsg {

// Error taxonomy shared across the library. The CLI maps kinds to exit codes:
// precondition/input problems exit 1, internal failures exit 2.
enum class ErrorKind {
    ParseError,
    TriangleFaceFound,
    NonManifoldEdge,
    DegenerateFace,
    OrientationError,
    AmbiguousOrdering,
    IsolatedFace,
    PreconditionViolation,
    IoError,
    ShapeMismatch,
    LevelMismatch,
    OrderingError,
    EmptyGroup,
    RankDeficientFit,
    ConfigMismatch,
    DivergenceAbort,
    Internal,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

    // True for errors caused by bad input rather than internal failure.
    bool is_precondition() const {
        return kind_ != ErrorKind::Internal && kind_ != ErrorKind::DivergenceAbort;
    }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) raise(kind, message);
}

}  // namespace rsg
