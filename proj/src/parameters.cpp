#include "miccan/parameters.hpp"

#include <numeric>

#include "miccan/errors.hpp"

namespace miccan {

std::size_t ParameterSet::add(std::string name, std::vector<std::uint32_t> dims) {
  const std::size_t n =
      std::accumulate(dims.begin(), dims.end(), std::size_t{1}, [](std::size_t a, std::uint32_t d) { return a * d; });
  return add(NamedArray{std::move(name), std::move(dims), std::vector<double>(n, 0.0)});
}

std::size_t ParameterSet::add(NamedArray array) {
  const std::size_t n = std::accumulate(array.dims.begin(), array.dims.end(), std::size_t{1},
                                        [](std::size_t a, std::uint32_t d) { return a * d; });
  if (n != array.values.size()) throw InvalidInput("parameter '" + array.name + "' size does not match its dims");
  if (index_.contains(array.name)) throw InvalidInput("duplicate parameter name '" + array.name + "'");
  index_.emplace(array.name, arrays_.size());
  arrays_.push_back(std::move(array));
  return arrays_.size() - 1;
}

std::size_t ParameterSet::index_of(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw InvalidInput("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

bool ParameterSet::contains(std::string_view name) const { return index_.contains(std::string(name)); }

std::size_t ParameterSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& a : arrays_) n += a.values.size();
  return n;
}

GradientSet zero_gradients(const ParameterSet& params) {
  GradientSet g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) g[i].assign(params[i].values.size(), 0.0);
  return g;
}

void accumulate(GradientSet& into, const GradientSet& from, double scale) {
  if (into.size() != from.size()) throw InvalidInput("gradient set size mismatch");
  for (std::size_t i = 0; i < into.size(); ++i) {
    if (into[i].size() != from[i].size()) throw InvalidInput("gradient buffer size mismatch");
    for (std::size_t k = 0; k < into[i].size(); ++k) into[i][k] += scale * from[i][k];
  }
}

}  // namespace miccan
