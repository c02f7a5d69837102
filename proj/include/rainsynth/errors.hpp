#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rainsynth {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed text input. Carries the 1-based line number of the offending line.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Binary stream ended mid-record.
class TruncatedStreamError : public Error {
public:
  using Error::Error;
};

/// Binary model id (or a model name being serialized) has no known mapping.
class UnknownModelError : public Error {
public:
  using Error::Error;
};

/// Camera model cannot be consumed by the viewpoint-matrix builder.
class UnsupportedCameraModelError : public Error {
public:
  using Error::Error;
};

/// An image record references a camera id that is not present.
class DanglingCameraIdError : public Error {
public:
  using Error::Error;
};

class EmptyCameraSetError : public Error {
public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
public:
  using Error::Error;
};

class ParamOutOfRangeError : public Error {
public:
  using Error::Error;
};

class ShapeMismatchError : public Error {
public:
  using Error::Error;
};

class NonFiniteLossError : public Error {
public:
  using Error::Error;
};

/// Bad key, bad value, or unknown key in a job config file.
class ConfigError : public Error {
public:
  ConfigError(const std::string& key, const std::string& reason)
      : Error("config key '" + key + "': " + reason), key_(key) {}
  const std::string& key() const { return key_; }

private:
  std::string key_;
};

class IoError : public Error {
public:
  using Error::Error;
};

class ManifestError : public Error {
public:
  using Error::Error;
};

}  // namespace rainsynth
