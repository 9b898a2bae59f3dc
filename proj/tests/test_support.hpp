#pragma once

#include <cstdint>
#include <random>

#include "iapg/linops.hpp"

namespace testing_support {

using Vec = iapg::Vector<double>;
using Mat = iapg::Matrix<double>;

inline Vec random_vector(std::mt19937_64& rng, iapg::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Vec v(n);
  for (iapg::Index i = 0; i < n; ++i) v[i] = scale * normal(rng);
  return v;
}

inline Mat random_matrix(std::mt19937_64& rng, iapg::Index r, iapg::Index c) {
  std::normal_distribution<double> normal;
  Mat m(r, c);
  for (iapg::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<iapg::Index>(xs.size()));
  iapg::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace testing_support
