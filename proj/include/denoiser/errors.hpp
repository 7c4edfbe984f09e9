#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace denoiser {

// Base for every error raised by the library. The CLI maps ConfigError and
// friends to exit code 2, everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidClassText : public Error {
 public:
  using Error::Error;
};

class CorpusParseError : public Error {
 public:
  CorpusParseError(std::size_t line, const std::string& what)
      : Error("corpus line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("corpus contains no words") {}
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class StoreError : public Error {
 public:
  using Error::Error;
};

class MissingEmbedding : public StoreError {
 public:
  explicit MissingEmbedding(const std::string& key)
      : StoreError("no stored embedding for \"" + key + "\""), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace denoiser
