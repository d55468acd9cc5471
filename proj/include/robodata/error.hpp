#pragma once

#include <stdexcept>
#include <string>

namespace robodata {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidQuaternionError : public Error { public: using Error::Error; };
class InvalidRotationError   : public Error { public: using Error::Error; };
class ReprMismatchError      : public Error { public: using Error::Error; };
class InvalidScaleError      : public Error { public: using Error::Error; };
class InvalidValueError      : public Error { public: using Error::Error; };
class InvalidDimsError       : public Error { public: using Error::Error; };
class OutOfBoundsError       : public Error { public: using Error::Error; };
class ShapeMismatchError     : public Error { public: using Error::Error; };
class UnknownProfileError    : public Error { public: using Error::Error; };
class IoError                : public Error { public: using Error::Error; };
class ChecksumError          : public Error { public: using Error::Error; };
class SchemaVersionError     : public Error { public: using Error::Error; };

}  // namespace robodata
