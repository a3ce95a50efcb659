#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tpinn {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can map families of failures onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// autodiff
class RecordError : public Error { public: using Error::Error; };
class GraphError : public Error { public: using Error::Error; };
class SeedError : public Error { public: using Error::Error; };

// configuration and shapes
class ConfigError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };

// data
class FormatError : public Error { public: using Error::Error; };

class ValidationError : public Error {
 public:
  ValidationError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  explicit ValidationError(const std::string& what) : Error(what) {}

  // 1-based data row, 0 when the failure is not tied to a row.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_ = 0;
};

class RankError : public Error {
 public:
  RankError(std::size_t rank, std::size_t required)
      : Error("feature matrix is rank deficient: rank " + std::to_string(rank) +
              " < " + std::to_string(required)),
        rank_(rank) {}

  std::size_t rank() const noexcept { return rank_; }

 private:
  std::size_t rank_;
};

// training
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& what)
      : Error("diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

class IoError : public Error { public: using Error::Error; };

}  // namespace tpinn
