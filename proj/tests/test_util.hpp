/* Copyright 2026 The negsent Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef NEGSENT_TESTS_TEST_UTIL_HPP_
#define NEGSENT_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "negsent/nnet.hpp"

namespace negsent::testing {

// ||a - b|| / (||a|| + ||b||), 0 when both vanish.
inline double relative_error(const Matrix& a, const Matrix& b) {
  const double denom = a.norm() + b.norm();
  return denom == 0.0 ? 0.0 : (a - b).norm() / denom;
}

// Central differences of `loss` with respect to every entry of `m`.
inline Matrix numeric_gradient(Matrix& m, const std::function<double()>& loss, double h = 1e-5) {
  Matrix g(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double saved = m(r, c);
      m(r, c) = saved + h;
      const double up = loss();
      m(r, c) = saved - h;
      const double down = loss();
      m(r, c) = saved;
      g(r, c) = (up - down) / (2 * h);
    }
  }
  return g;
}

struct GradReport {
  std::string name;
  double error = 0.0;
};

// Compares the analytic gradients already stored in `params` against central
// differences. Returns the worst tensor.
inline GradReport check_param_grads(const nn::ParamList& params,
                                    const std::function<double()>& loss) {
  GradReport worst;
  worst.error = -1.0;
  for (nn::Param* p : params) {
    const Matrix analytic = p->grad;
    const Matrix numeric = numeric_gradient(p->value, loss);
    const double err = relative_error(analytic, numeric);
    if (err > worst.error) worst = {p->name, err};
  }
  return worst;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double bound = 1.0) {
  Matrix m(rows, cols);
  nn::uniform_fill(m, bound, rng);
  return m;
}

inline nn::Sequence random_sequence(int steps, Eigen::Index batch, Eigen::Index dim, Rng& rng) {
  nn::Sequence xs;
  for (int t = 0; t < steps; ++t) xs.push_back(random_matrix(batch, dim, rng));
  return xs;
}

// Zeroes rows of padding steps so inputs look like real padded batches.
inline void zero_padding(nn::Sequence& xs, const std::vector<int>& lengths) {
  for (std::size_t t = 0; t < xs.size(); ++t) {
    for (std::size_t b = 0; b < lengths.size(); ++b) {
      if (static_cast<int>(t) >= lengths[b]) xs[t].row(static_cast<Eigen::Index>(b)).setZero();
    }
  }
}

inline double dot(const nn::Sequence& a, const nn::Sequence& b) {
  double s = 0;
  for (std::size_t t = 0; t < a.size(); ++t) s += (a[t].array() * b[t].array()).sum();
  return s;
}

}  // namespace negsent::testing

#endif  // NEGSENT_TESTS_TEST_UTIL_HPP_
