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

// Linear-chain CRF over per-token emission scores.
//
// score(y) = start[y_0] + sum_t emit[t, y_t] + sum_t trans[y_{t-1}, y_t] + stop[y_{n-1}]

#ifndef NEGSENT_CRF_HPP_
#define NEGSENT_CRF_HPP_

#include <span>
#include <string>
#include <vector>

#include "negsent/common.hpp"
#include "negsent/nnet.hpp"

namespace negsent {

struct CrfParams {
  Matrix transitions;  // [from, to]
  RowVector start;
  RowVector stop;

  static CrfParams zeros(int labels);
  int labels() const { return static_cast<int>(transitions.rows()); }
};

double crf_path_score(const Matrix& emissions, std::span<const int> path, const CrfParams& p);

// Forward algorithm in log space.
double crf_log_partition(const Matrix& emissions, const CrfParams& p);

// Negative log-likelihood of `gold`. When given, `d_emissions` is overwritten
// and `grads` is accumulated into (it must have the shapes of `p`).
double crf_nll(const Matrix& emissions, std::span<const int> gold, const CrfParams& p,
               Matrix* d_emissions = nullptr, CrfParams* grads = nullptr);

// Best path; ties go to the lowest label index at every decision.
std::vector<int> viterbi(const Matrix& emissions, const CrfParams& p);

// Additive decoding constraints for BIO label names: -inf for I-X after
// anything but B-X or I-X, and for I-X at the start. Names without a B-/I-
// prefix are unconstrained.
CrfParams bio_constraints(const std::vector<std::string>& label_names);

// Trainable CRF layer.
class Crf {
 public:
  Crf() = default;
  Crf(const std::string& name, int labels);

  void collect(nn::ParamList& out) { out.insert(out.end(), {&transitions, &start, &stop}); }
  int labels() const { return static_cast<int>(transitions.value.rows()); }
  CrfParams params() const;
  void accumulate(const CrfParams& grads);

  nn::Param transitions;
  nn::Param start;
  nn::Param stop;
};

}  // namespace negsent

#endif  // NEGSENT_CRF_HPP_
