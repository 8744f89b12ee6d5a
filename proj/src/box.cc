#include "idone/box.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace idone {

Box::Box(std::vector<int> lower, std::vector<int> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw std::invalid_argument("Box: lower has " + std::to_string(lower_.size()) +
                                " entries but upper has " + std::to_string(upper_.size()));
  }
  if (lower_.empty()) {
    throw std::invalid_argument("Box: dimension must be at least 1");
  }
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (lower_[i] >= upper_[i]) {
      throw std::invalid_argument("Box: bounds must satisfy l < u (dimension " + std::to_string(i) +
                                  ": l=" + std::to_string(lower_[i]) +
                                  ", u=" + std::to_string(upper_[i]) + ")");
    }
  }
}

Box Box::FromReal(std::span<const double> lower, std::span<const double> upper) {
  auto to_int = [](std::span<const double> v) {
    std::vector<int> out;
    out.reserve(v.size());
    for (double b : v) {
      if (!std::isfinite(b) || b != std::floor(b)) {
        throw std::invalid_argument("Box: bound " + std::to_string(b) + " is not an integer");
      }
      out.push_back(static_cast<int>(b));
    }
    return out;
  };
  return Box(to_int(lower), to_int(upper));
}

bool Box::Contains(std::span<const int> x) const {
  if (x.size() != lower_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
  }
  return true;
}

bool Box::Contains(std::span<const double> x) const {
  if (x.size() != lower_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
  }
  return true;
}

long double Box::LatticeSize() const {
  long double size = 1.0L;
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    size *= static_cast<long double>(upper_[i] - lower_[i] + 1);
  }
  return size;
}

}  // namespace idone
