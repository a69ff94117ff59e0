#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace miccan {

struct NamedArray {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<double> values;

  bool operator==(const NamedArray&) const = default;
};

/// Ordered collection of named float64 arrays. Insertion order is the
/// serialization order and the order in which optimizers visit parameters.
class ParameterSet {
 public:
  /// Adds a zero-filled array; names must be unique.
  std::size_t add(std::string name, std::vector<std::uint32_t> dims);
  std::size_t add(NamedArray array);

  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const;

  NamedArray& operator[](std::size_t i) { return arrays_[i]; }
  const NamedArray& operator[](std::size_t i) const { return arrays_[i]; }
  std::span<const NamedArray> arrays() const { return arrays_; }
  std::size_t size() const noexcept { return arrays_.size(); }
  /// Total number of scalar parameters.
  std::size_t scalar_count() const noexcept;

  bool operator==(const ParameterSet& o) const { return arrays_ == o.arrays_; }

 private:
  std::vector<NamedArray> arrays_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// One gradient buffer per parameter array, same order and sizes.
using GradientSet = std::vector<std::vector<double>>;

GradientSet zero_gradients(const ParameterSet& params);
void accumulate(GradientSet& into, const GradientSet& from, double scale = 1.0);

}  // namespace miccan
