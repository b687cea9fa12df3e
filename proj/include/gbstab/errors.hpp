#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace gbstab {

/// Base of every numerical failure raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("Domain", what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("InvalidArgument", what) {}
};

/// No bounded periodic orbit exists for the requested parameters.
class NonexistenceError : public Error {
 public:
  explicit NonexistenceError(const std::string& what) : Error("Nonexistence", what) {}
};

/// The orbit sits on a separatrix or has collapsed onto an equilibrium.
class DegenerateOrbitError : public Error {
 public:
  explicit DegenerateOrbitError(const std::string& what) : Error("DegenerateOrbit", what) {}
};

class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : Error("Accuracy", what), achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class LinearAlgebraError : public Error {
 public:
  explicit LinearAlgebraError(const std::string& what) : Error("LinearAlgebra", what) {}
};

class SolvabilityError : public Error {
 public:
  explicit SolvabilityError(const std::string& what) : Error("Solvability", what) {}
};

class DegenerateKernelError : public Error {
 public:
  explicit DegenerateKernelError(const std::string& what) : Error("DegenerateKernel", what) {}
};

/// A quantity whose sign enters the index count is too close to zero to classify.
class NearDegenerateError : public Error {
 public:
  explicit NearDegenerateError(const std::string& what) : Error("NearDegenerate", what) {}
};

class KernelStructureError : public Error {
 public:
  explicit KernelStructureError(const std::string& what) : Error("KernelStructure", what) {}
};

class IndeterminateKreinError : public Error {
 public:
  explicit IndeterminateKreinError(const std::string& what) : Error("IndeterminateKrein", what) {}
};

class PoleError : public Error {
 public:
  PoleError(const std::string& what, std::complex<double> lambda)
      : Error("Pole", what), lambda_(lambda) {}

  std::complex<double> lambda() const noexcept { return lambda_; }

 private:
  std::complex<double> lambda_;
};

class StencilError : public Error {
 public:
  explicit StencilError(const std::string& what) : Error("Stencil", what) {}
};

class LimitInconclusive : public Error {
 public:
  explicit LimitInconclusive(const std::string& what) : Error("LimitInconclusive", what) {}
};

class BlowupError : public Error {
 public:
  BlowupError(const std::string& what, double time) : Error("Blowup", what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

class InconclusiveError : public Error {
 public:
  explicit InconclusiveError(const std::string& what) : Error("Inconclusive", what) {}
};

}  // namespace gbstab
