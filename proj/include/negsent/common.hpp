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

#ifndef NEGSENT_COMMON_HPP_
#define NEGSENT_COMMON_HPP_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace negsent {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Malformed input file. `line` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Caller violated a documented precondition.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Rng = std::mt19937_64;

// Independent random streams of one training run. Giving every consumer its
// own stream keeps e.g. the sentiment trajectory unaffected by whether an
// auxiliary head exists.
enum class RngStream : std::uint64_t {
  kInitShared = 1,
  kInitNegationHead = 2,
  kInitSentimentHead = 3,
  kEmbeddingFallback = 4,
  kDropout = 5,
  kShuffleMain = 6,
  kShuffleAux = 7,
  kSubsample = 8,
  kInitFlags = 9,
};

Rng make_rng(std::uint64_t seed, RngStream stream);

// splitmix64 finalizer; used for counter-based draws.
std::uint64_t mix64(std::uint64_t x);

std::string to_lower(std::string_view s);

}  // namespace negsent

#endif  // NEGSENT_COMMON_HPP_
