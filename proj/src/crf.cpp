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

#include "negsent/crf.hpp"

#include <cmath>
#include <limits>

namespace negsent {

namespace {

double logsumexp(const RowVector& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

void check(const Matrix& emissions, const CrfParams& p) {
  if (emissions.rows() < 1) throw UsageError("crf: empty sequence");
  const auto t = p.transitions.rows();
  if (p.transitions.cols() != t || p.start.size() != t || p.stop.size() != t ||
      emissions.cols() != t) {
    throw ShapeError("crf: label dimension mismatch");
  }
}

void check_labels(std::span<const int> path, const Matrix& emissions) {
  if (static_cast<Eigen::Index>(path.size()) != emissions.rows()) {
    throw ShapeError("crf: path length does not match emissions");
  }
  for (int y : path) {
    if (y < 0 || y >= emissions.cols()) throw UsageError("crf: label outside inventory");
  }
}

// alpha(t, y): log-sum of scores of all prefixes ending in y at t.
Matrix forward_table(const Matrix& em, const CrfParams& p) {
  const Eigen::Index n = em.rows();
  const Eigen::Index k = em.cols();
  Matrix alpha(n, k);
  alpha.row(0) = p.start + em.row(0);
  RowVector tmp(k);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index y = 0; y < k; ++y) {
      tmp = alpha.row(t - 1) + p.transitions.col(y).transpose();
      alpha(t, y) = logsumexp(tmp) + em(t, y);
    }
  }
  return alpha;
}

// beta(t, y): log-sum of scores of all suffixes after t given y at t, incl. stop.
Matrix backward_table(const Matrix& em, const CrfParams& p) {
  const Eigen::Index n = em.rows();
  const Eigen::Index k = em.cols();
  Matrix beta(n, k);
  beta.row(n - 1) = p.stop;
  RowVector tmp(k);
  for (Eigen::Index t = n - 1; t-- > 0;) {
    for (Eigen::Index y = 0; y < k; ++y) {
      tmp = p.transitions.row(y) + em.row(t + 1) + beta.row(t + 1);
      beta(t, y) = logsumexp(tmp);
    }
  }
  return beta;
}

}  // namespace

CrfParams CrfParams::zeros(int labels) {
  return CrfParams{Matrix::Zero(labels, labels), RowVector::Zero(labels), RowVector::Zero(labels)};
}

double crf_path_score(const Matrix& emissions, std::span<const int> path, const CrfParams& p) {
  check(emissions, p);
  check_labels(path, emissions);
  double s = p.start(path[0]) + p.stop(path.back());
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += emissions(static_cast<Eigen::Index>(t), path[t]);
    if (t > 0) s += p.transitions(path[t - 1], path[t]);
  }
  return s;
}

double crf_log_partition(const Matrix& emissions, const CrfParams& p) {
  check(emissions, p);
  const Matrix alpha = forward_table(emissions, p);
  return logsumexp(alpha.row(emissions.rows() - 1) + p.stop);
}

double crf_nll(const Matrix& emissions, std::span<const int> gold, const CrfParams& p,
               Matrix* d_emissions, CrfParams* grads) {
  check(emissions, p);
  check_labels(gold, emissions);
  const Eigen::Index n = emissions.rows();
  const Eigen::Index k = emissions.cols();
  const Matrix alpha = forward_table(emissions, p);
  const double log_z = logsumexp(alpha.row(n - 1) + p.stop);
  const double loss = log_z - crf_path_score(emissions, gold, p);
  if (!d_emissions && !grads) return loss;

  const Matrix beta = backward_table(emissions, p);
  const Matrix marginals = (alpha + beta).array().unaryExpr([&](double v) {
    return std::exp(v - log_z);
  }).matrix();

  if (d_emissions) {
    *d_emissions = marginals;
    for (Eigen::Index t = 0; t < n; ++t) (*d_emissions)(t, gold[static_cast<std::size_t>(t)]) -= 1.0;
  }
  if (grads) {
    grads->start += marginals.row(0);
    grads->start(gold[0]) -= 1.0;
    grads->stop += marginals.row(n - 1);
    grads->stop(gold.back()) -= 1.0;
    for (Eigen::Index t = 1; t < n; ++t) {
      for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
          grads->transitions(a, b) += std::exp(alpha(t - 1, a) + p.transitions(a, b) +
                                               emissions(t, b) + beta(t, b) - log_z);
        }
      }
      grads->transitions(gold[static_cast<std::size_t>(t) - 1], gold[static_cast<std::size_t>(t)]) -=
          1.0;
    }
  }
  return loss;
}

std::vector<int> viterbi(const Matrix& emissions, const CrfParams& p) {
  check(emissions, p);
  const Eigen::Index n = emissions.rows();
  const Eigen::Index k = emissions.cols();
  Matrix delta(n, k);
  Eigen::MatrixXi back = Eigen::MatrixXi::Zero(n, k);
  delta.row(0) = p.start + emissions.row(0);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index y = 0; y < k; ++y) {
      double best = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (Eigen::Index prev = 0; prev < k; ++prev) {
        const double s = delta(t - 1, prev) + p.transitions(prev, y);
        if (s > best) {
          best = s;
          arg = static_cast<int>(prev);
        }
      }
      delta(t, y) = best + emissions(t, y);
      back(t, y) = arg;
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  int last = 0;
  for (Eigen::Index y = 0; y < k; ++y) {
    const double s = delta(n - 1, y) + p.stop(y);
    if (s > best) {
      best = s;
      last = static_cast<int>(y);
    }
  }
  std::vector<int> path(static_cast<std::size_t>(n));
  path.back() = last;
  for (Eigen::Index t = n - 1; t > 0; --t) {
    path[static_cast<std::size_t>(t) - 1] = back(t, path[static_cast<std::size_t>(t)]);
  }
  return path;
}

Crf::Crf(const std::string& name, int labels)
    : transitions(name + ".transitions", labels, labels),
      start(name + ".start", 1, labels),
      stop(name + ".stop", 1, labels) {}

CrfParams Crf::params() const {
  return CrfParams{transitions.value, start.value.row(0), stop.value.row(0)};
}

void Crf::accumulate(const CrfParams& grads) {
  transitions.grad += grads.transitions;
  start.grad.row(0) += grads.start;
  stop.grad.row(0) += grads.stop;
}

CrfParams bio_constraints(const std::vector<std::string>& label_names) {
  const int k = static_cast<int>(label_names.size());
  CrfParams c = CrfParams::zeros(k);
  const double forbid = -std::numeric_limits<double>::infinity();
  auto inside_of = [](const std::string& name) -> std::string {
    return name.size() > 2 && name.compare(0, 2, "I-") == 0 ? name.substr(2) : std::string();
  };
  auto type_of = [](const std::string& name) -> std::string {
    if (name.size() > 2 && (name.compare(0, 2, "B-") == 0 || name.compare(0, 2, "I-") == 0)) {
      return name.substr(2);
    }
    return std::string();
  };
  for (int to = 0; to < k; ++to) {
    const std::string inside = inside_of(label_names[static_cast<std::size_t>(to)]);
    if (inside.empty()) continue;
    c.start(to) = forbid;
    for (int from = 0; from < k; ++from) {
      if (type_of(label_names[static_cast<std::size_t>(from)]) != inside) c.transitions(from, to) = forbid;
    }
  }
  return c;
}

}  // namespace negsent
