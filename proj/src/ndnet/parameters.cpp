#include "tg/ndnet/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "tg/errors.hpp"

namespace tg::nn {
namespace {

std::size_t total_size(const std::vector<ParameterSegment>& segments) {
  std::size_t expected_offset = 0;
  for (const auto& s : segments) {
    if (s.offset != expected_offset) throw ShapeError("parameter segments are not contiguous");
    expected_offset += s.size();
  }
  return expected_offset;
}

}  // namespace

ParameterVector::ParameterVector(std::vector<ParameterSegment> segments)
    : segments_(std::move(segments)), values_(total_size(segments_), 0.0) {}

ParameterVector::ParameterVector(std::vector<ParameterSegment> segments, std::vector<double> values)
    : segments_(std::move(segments)), values_(std::move(values)) {
  if (total_size(segments_) != values_.size()) {
    throw ShapeError("parameter array length " + std::to_string(values_.size()) +
                     " does not match segment layout");
  }
}

std::span<double> ParameterVector::segment(std::size_t i) {
  const auto& s = segments_.at(i);
  return std::span<double>(values_).subspan(s.offset, s.size());
}

std::span<const double> ParameterVector::segment(std::size_t i) const {
  const auto& s = segments_.at(i);
  return std::span<const double>(values_).subspan(s.offset, s.size());
}

void ParameterVector::assign(std::span<const double> values) {
  if (values.size() != values_.size()) {
    throw ShapeError("cannot assign " + std::to_string(values.size()) + " values to a parameter vector of size " +
                     std::to_string(values_.size()));
  }
  std::copy(values.begin(), values.end(), values_.begin());
}

double ParameterVector::dot(const ParameterVector& other) const {
  if (other.size() != size()) throw ShapeError("parameter vector size mismatch in dot");
  return as_eigen().dot(other.as_eigen());
}

double ParameterVector::norm() const { return as_eigen().norm(); }

void ParameterVector::axpy(double alpha, const ParameterVector& other) {
  if (other.size() != size()) throw ShapeError("parameter vector size mismatch in axpy");
  as_eigen() += alpha * other.as_eigen();
}

}  // namespace tg::nn
