#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bargain {

struct Utterance;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration detected before any game or network activity.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Turn order or protocol grammar violated.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Operation not permitted in the current game state.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Remote backend failed after exhausting retries, or replied unusably.
class BackendError : public Error {
 public:
  using Error::Error;
};

class ReplayError : public Error {
 public:
  using Error::Error;
};

/// Demo bank contains the same window with conflicting labels.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Critic reply did not contain exactly three suggestions.
class FeedbackFormatError : public Error {
 public:
  FeedbackFormatError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw_text() const { return raw_; }

 private:
  std::string raw_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace bargain
