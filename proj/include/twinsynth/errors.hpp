#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twinsynth {

// Root of every domain error raised by the library. The CLI maps these to
// exit code 1; UsageError maps to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input text or file. `location` is a record index, line number or
// key path, whichever the producer could pin down.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string location = {})
      : Error(location.empty() ? what : what + " (at " + location + ")"),
        message_(what),
        location_(std::move(location)) {}
  const std::string& message() const noexcept { return message_; }
  const std::string& location() const noexcept { return location_; }

 private:
  std::string message_;
  std::string location_;
};

// A record parsed fine but breaks a type invariant.
class InvariantError : public Error {
 public:
  InvariantError(const std::string& what, std::string record_id = {})
      : Error(record_id.empty() ? what : "record '" + record_id + "': " + what),
        record_id_(std::move(record_id)) {}
  const std::string& record_id() const noexcept { return record_id_; }

 private:
  std::string record_id_;
};

// Wraps (via std::throw_with_nested) the error raised while processing one
// item of a batch, so the cause chain names the item.
class ItemFailure : public Error {
 public:
  ItemFailure(const std::string& stage, std::string item_id)
      : Error(stage + " failed for '" + item_id + "'"), item_id_(std::move(item_id)) {}
  const std::string& item_id() const noexcept { return item_id_; }

 private:
  std::string item_id_;
};

// "outer: inner: innermost" for nested exceptions.
inline std::string cause_chain(const std::exception& e) {
  std::string out = e.what();
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    out += ": " + cause_chain(inner);
  } catch (...) {
    out += ": unknown error";
  }
  return out;
}

class IoError : public Error {
 public:
  using Error::Error;
};

// ---- provider-gateway ------------------------------------------------------

class ProviderError : public Error {
 public:
  using Error::Error;
};

struct AttemptRecord {
  int attempt = 0;
  int status = 0;  // HTTP status, 0 when the transport itself failed
  std::string message;
};

class TransportError : public ProviderError {
 public:
  TransportError(const std::string& what, std::vector<AttemptRecord> attempts)
      : ProviderError(what), attempts_(std::move(attempts)) {}
  const std::vector<AttemptRecord>& attempts() const noexcept { return attempts_; }

 private:
  std::vector<AttemptRecord> attempts_;
};

class AuthError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class RefusalError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class UnknownTagError : public ProviderError {
 public:
  explicit UnknownTagError(const std::string& tag)
      : ProviderError("mock provider has no script entry for tag '" + tag + "'"), tag_(tag) {}
  const std::string& tag() const noexcept { return tag_; }

 private:
  std::string tag_;
};

class MissingSlotError : public Error {
 public:
  explicit MissingSlotError(const std::string& slot)
      : Error("missing template slot '" + slot + "'"), slot_(slot) {}
  const std::string& slot() const noexcept { return slot_; }

 private:
  std::string slot_;
};

// ---- style-extractor -------------------------------------------------------

class UnrecognizedTypeError : public Error {
 public:
  explicit UnrecognizedTypeError(const std::string& raw)
      : Error("provider answer names no known therapeutic type: '" + raw + "'"), raw_(raw) {}
  const std::string& raw_text() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class LookupMissError : public Error {
 public:
  explicit LookupMissError(const std::string& name)
      : Error("therapeutic type not in knowledge base: '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class DuplicateTopicError : public Error {
 public:
  explicit DuplicateTopicError(const std::string& topic)
      : Error("duplicate topic '" + topic + "'"), topic_(topic) {}
  const std::string& topic() const noexcept { return topic_; }

 private:
  std::string topic_;
};

// ---- dialogue-synthesizer --------------------------------------------------

class NoStyleForTopicError : public Error {
 public:
  explicit NoStyleForTopicError(const std::string& topic)
      : Error("no linguistic style for topic '" + topic + "'"), topic_(topic) {}
  const std::string& topic() const noexcept { return topic_; }

 private:
  std::string topic_;
};

class NoTechniqueForTopicError : public Error {
 public:
  explicit NoTechniqueForTopicError(const std::string& topic)
      : Error("no therapy technique for topic '" + topic + "'"), topic_(topic) {}
  const std::string& topic() const noexcept { return topic_; }

 private:
  std::string topic_;
};

class TopicMismatchError : public Error {
 public:
  using Error::Error;
};

// ---- dataset-ops -----------------------------------------------------------

class MissingScoreError : public Error {
 public:
  explicit MissingScoreError(const std::string& id)
      : Error("no richness score for seed '" + id + "'"), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class InsufficientTopicError : public Error {
 public:
  InsufficientTopicError(const std::string& topic, std::size_t have, std::size_t need)
      : Error("topic '" + topic + "' has " + std::to_string(have) + " dialogues, " +
              std::to_string(need) + " needed for the test split"),
        topic_(topic),
        have_(have) {}
  const std::string& topic() const noexcept { return topic_; }
  std::size_t count() const noexcept { return have_; }

 private:
  std::string topic_;
  std::size_t have_;
};

// ---- eval-suite ------------------------------------------------------------

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class ZeroVectorError : public Error {
 public:
  using Error::Error;
};

class DegenerateAgreementError : public Error {
 public:
  using Error::Error;
};

class OutOfScaleError : public Error {
 public:
  OutOfScaleError(int value, int lo, int hi)
      : Error("score " + std::to_string(value) + " outside scale [" + std::to_string(lo) + ", " +
              std::to_string(hi) + "]"),
        value_(value) {}
  int value() const noexcept { return value_; }

 private:
  int value_;
};

class MissingRatingError : public Error {
 public:
  using Error::Error;
};

}  // namespace twinsynth
