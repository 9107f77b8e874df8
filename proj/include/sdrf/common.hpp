#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdrf {

// Error kinds surfaced by the library. The CLI maps SchemaError/ConfigError to
// exit code 2 and everything else to 1.
enum class ErrorKind {
  DegenerateSample,
  DimensionMismatch,
  UnnormalizedInput,
  ZeroDim,
  IncompatibleDesign,
  EmptySelection,
  EmptyRegion,
  InvalidWeights,
  DegenerateDraw,
  MismatchedDraws,
  TooFewPSUs,
  InvalidSplit,
  EmptySplitSide,
  NoSupport,
  DegenerateSupport,
  SingularCovariance,
  SchemaError,
  ConfigError,
  IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Dense row-major matrix. Rows are observations.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void append_row(std::span<const double> values);

  // New matrix holding the given rows, in order.
  Matrix select_rows(std::span<const std::size_t> rows) const;

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent child seeds from a parent
// seed and a stream index so results never depend on scheduling order.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream, std::uint64_t sub);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace sdrf
