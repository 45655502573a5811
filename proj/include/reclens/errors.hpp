#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reclens {

// Base of every error raised by the library. The CLI maps these to exit
// code 1 (input error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line_no, std::string reason)
      : Error("line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no),
        reason_(std::move(reason)) {}

  std::size_t line_no() const { return line_no_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_no_;
  std::string reason_;
};

class DuplicateHitId : public Error {
 public:
  explicit DuplicateHitId(std::string hit_id)
      : Error("duplicate hit_id: " + hit_id), hit_id_(std::move(hit_id)) {}

  const std::string& hit_id() const { return hit_id_; }

 private:
  std::string hit_id_;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class EmptyDenominator : public Error {
 public:
  EmptyDenominator() : Error("metric has zero trials (no hits)") {}
};

class EmptyPopulation : public Error {
 public:
  EmptyPopulation() : Error("no customer received a hit") {}
};

class InvalidSample : public Error {
 public:
  using Error::Error;
};

class ConstantSeries : public Error {
 public:
  ConstantSeries() : Error("series has zero variance") {}
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : Error("series lengths differ: " + std::to_string(a) + " vs " +
              std::to_string(b)) {}
};

}  // namespace reclens
