#pragma once

#include <stdexcept>
#include <string>

namespace mfl {

// Every failure mode the library reports. CLI maps construction/verification
// failures to exit 1 and usage/parse problems to exit 2.
enum class Err {
  NonPrimeCharacteristic,
  ReduciblePolynomial,
  UnsupportedSize,
  ElementOutOfRing,
  NotInvertible,
  RingMismatch,
  SingularMatrix,
  TooLarge,
  NotLatinSquare,
  NoIdentity,
  IndexOutOfRange,
  MissingSecondArgument,
  MissingThirdArgument,
  NotMoufang,
  NotASubloop,
  NotNormal,
  IllDefined,
  NotPseudoautomorphism,
  Timeout,
  AutomorphismOrderViolation,
  NotMoufangElement,
  BaseNotAssociative,
  TrialityFails,
  OperatorDomainMismatch,
  TooLargeToMaterialize,
  NotAGroup,
  InvarianceNotEstablished,
  OutOfCatalog,
  KernelNotAbelian,
  KernelNotNormal,
  KernelNotClosed,
  TooLargeToDecide,
  BadDescriptor,
  BadFile,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) { throw Error(code, msg); }

}  // namespace mfl
