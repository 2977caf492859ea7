#pragma once

#include <stdexcept>
#include <string>

namespace cofmat {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument or configuration value lies outside the admissible set.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A spectral precondition (symmetry, definiteness, conditioning) fails.
class SpectralError : public Error {
 public:
  using Error::Error;
};

/// The requested evaluation method cannot be applied to this input;
/// callers are expected to fall back to another method.
class MethodUnavailable : public Error {
 public:
  using Error::Error;
};

/// Result would overflow the floating point range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A shift lies in (or too close to) the spectrum of an operator.
class ResolventError : public Error {
 public:
  ResolventError(const std::string& what, double nearest_re, double nearest_im)
      : Error(what), nearest_re_(nearest_re), nearest_im_(nearest_im) {}

  double nearest_real() const { return nearest_re_; }
  double nearest_imag() const { return nearest_im_; }

 private:
  double nearest_re_;
  double nearest_im_;
};

}  // namespace cofmat
