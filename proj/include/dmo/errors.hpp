#pragma once

#include <stdexcept>
#include <string>

namespace dmo {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptyBall : Error {
  explicit EmptyBall(const std::string& msg) : Error(msg) {}
};

struct InvalidExponent : Error {
  explicit InvalidExponent(const std::string& msg) : Error(msg) {}
};

struct NotElliptic : Error {
  explicit NotElliptic(const std::string& msg) : Error(msg) {}
};

struct NotSymmetric : Error {
  explicit NotSymmetric(const std::string& msg) : Error(msg) {}
};

struct SolverDiverged : Error {
  explicit SolverDiverged(const std::string& msg) : Error(msg) {}
};

struct InsufficientSamples : Error {
  explicit InsufficientSamples(const std::string& msg) : Error(msg) {}
};

struct ScaleUnderflow : Error {
  explicit ScaleUnderflow(const std::string& msg) : Error(msg) {}
};

struct BallTooSmall : Error {
  explicit BallTooSmall(const std::string& msg) : Error(msg) {}
};

struct RadiusTooSmall : Error {
  explicit RadiusTooSmall(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace dmo
