#pragma once

#include <span>
#include <vector>

namespace idone {

// Integer box l <= x <= u with strict l_i < u_i in every dimension.
class Box {
 public:
  Box(std::vector<int> lower, std::vector<int> upper);

  // Accepts real-valued bounds from config input; rejects non-integers.
  static Box FromReal(std::span<const double> lower, std::span<const double> upper);

  int dimension() const { return static_cast<int>(lower_.size()); }
  const std::vector<int>& lower() const { return lower_; }
  const std::vector<int>& upper() const { return upper_; }
  int lower(int i) const { return lower_[i]; }
  int upper(int i) const { return upper_[i]; }

  bool Contains(std::span<const int> x) const;
  bool Contains(std::span<const double> x) const;

  // Number of lattice points, as a floating value since it overflows quickly.
  long double LatticeSize() const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  std::vector<int> lower_;
  std::vector<int> upper_;
};

}  // namespace idone
