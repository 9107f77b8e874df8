#include "sdrf/common.hpp"

namespace sdrf {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnnormalizedInput: return "UnnormalizedInput";
    case ErrorKind::ZeroDim: return "ZeroDim";
    case ErrorKind::IncompatibleDesign: return "IncompatibleDesign";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::InvalidWeights: return "InvalidWeights";
    case ErrorKind::DegenerateDraw: return "DegenerateDraw";
    case ErrorKind::MismatchedDraws: return "MismatchedDraws";
    case ErrorKind::TooFewPSUs: return "TooFewPSUs";
    case ErrorKind::InvalidSplit: return "InvalidSplit";
    case ErrorKind::EmptySplitSide: return "EmptySplitSide";
    case ErrorKind::NoSupport: return "NoSupport";
    case ErrorKind::DegenerateSupport: return "DegenerateSupport";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) {
    throw Error(ErrorKind::DimensionMismatch, "row width " + std::to_string(values.size()) +
                                                  " != " + std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Matrix Matrix::select_rows(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), cols_);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    auto src = row(rows[k]);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
  return mix_seed(mix_seed(parent) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream, std::uint64_t sub) {
  return derive_seed(derive_seed(parent, stream), sub);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

}  // namespace sdrf
