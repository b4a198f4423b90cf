#pragma once

#include <stdexcept>
#include <string>

namespace idic {

// Base for every error raised by the library. Callers that only care about
// "something failed" catch this; the subclasses carry the specific kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaViolation : public Error {
 public:
  using Error::Error;
};

class EmptyValue : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  BackendError(int status, std::string body)
      : Error("backend returned HTTP " + std::to_string(status) + ": " + body),
        status_(status),
        body_(std::move(body)) {}

  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class EmptyPool : public Error {
 public:
  EmptyPool() : Error("retrieval pool is empty") {}
};

class PromptTooLarge : public Error {
 public:
  PromptTooLarge(int estimate, int budget)
      : Error("prompt token estimate " + std::to_string(estimate) + " exceeds budget " +
              std::to_string(budget)),
        estimate_(estimate),
        budget_(budget) {}

  int estimate() const noexcept { return estimate_; }
  int budget() const noexcept { return budget_; }

 private:
  int estimate_;
  int budget_;
};

class MissingGold : public Error {
 public:
  using Error::Error;
};

class UnknownPrompt : public Error {
 public:
  explicit UnknownPrompt(std::string hash)
      : Error("no recorded completion for prompt sha256 " + hash), hash_(std::move(hash)) {}

  const std::string& hash() const noexcept { return hash_; }

 private:
  std::string hash_;
};

class EmptyResults : public Error {
 public:
  EmptyResults() : Error("no turn results to score") {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace idic
