#pragma once

#include <stdexcept>
#include <string>

namespace lgr {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All points of a cloud coincide; it cannot be scaled to the unit sphere.
class DegenerateCloud : public Error {
 public:
  using Error::Error;
};

/// Neighbor count outside [1, N-1] (or below the plane-fit minimum).
class BadK : public Error {
 public:
  using Error::Error;
};

/// Down-sample count outside the valid range.
class BadCount : public Error {
 public:
  using Error::Error;
};

/// A direction vector with (near-)zero norm where one is required.
class ZeroVector : public Error {
 public:
  using Error::Error;
};

/// Operation requires per-point normals and the cloud has none.
class MissingNormals : public Error {
 public:
  using Error::Error;
};

/// Tensor dimensions do not chain.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// Class label outside [0, n_classes).
class BadLabel : public Error {
 public:
  using Error::Error;
};

/// Anchor nearly orthogonal to a frame axis; sign flip undecidable.
class AmbiguousAnchor : public Error {
 public:
  using Error::Error;
};

/// Singular values too close for a stable canonical frame.
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Some rows carry normals and others do not.
class MixedNormals : public Error {
 public:
  using Error::Error;
};

/// Filesystem read/write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lgr
