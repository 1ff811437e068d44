#pragma once

#include <random>

#include "bigcn/dense_matrix.hpp"
#include "oracles.hpp"

namespace testutil {

inline oracle::Mat to_mat(const bigcn::DenseMatrix& m) {
  oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline bigcn::DenseMatrix to_dense(const oracle::Mat& m) {
  bigcn::DenseMatrix out(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = m[i][j];
  return out;
}

inline bigcn::DenseMatrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng,
                                        double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  bigcn::DenseMatrix m(r, c);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

inline double max_diff(const oracle::Mat& a, const oracle::Mat& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) d = std::max(d, std::abs(a[i][j] - b[i][j]));
  return d;
}

}  // namespace testutil
