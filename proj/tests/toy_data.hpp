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

#ifndef NEGSENT_TESTS_TOY_DATA_HPP_
#define NEGSENT_TESTS_TOY_DATA_HPP_

#include <random>

#include "negsent/training.hpp"

namespace negsent::toy {

// Toy world: ids 2..5 are positive words, 6..9 negative, 10 is a negator that
// flips the polarity of what follows, 11..19 are filler.
struct Toy {
  SentimentTask main;
  AuxTask aux;
  Matrix embeddings;
};

inline SentimentData make_sentiment(int n, Rng& rng) {
  SentimentData d;
  std::uniform_int_distribution<int> filler(11, 19), pos(2, 5), neg(6, 9), len(2, 6), coin(0, 1);
  for (int i = 0; i < n; ++i) {
    std::vector<int> ids;
    const int l = len(rng);
    for (int t = 0; t < l; ++t) ids.push_back(filler(rng));
    const bool positive = coin(rng) == 1;
    const bool negated = coin(rng) == 1;
    std::vector<int> flags(ids.size(), 0);
    const std::size_t at = static_cast<std::size_t>(l / 2);
    ids.insert(ids.begin() + static_cast<std::ptrdiff_t>(at), positive ? pos(rng) : neg(rng));
    flags.insert(flags.begin() + static_cast<std::ptrdiff_t>(at), negated ? 1 : 0);
    if (negated) {
      ids.insert(ids.begin() + static_cast<std::ptrdiff_t>(at), 10);
      flags.insert(flags.begin() + static_cast<std::ptrdiff_t>(at), 0);
    }
    d.ids.push_back(ids);
    d.flags.push_back(flags);
    d.labels.push_back(positive != negated ? 1 : 0);
  }
  return d;
}

inline TagData make_tags(int n, Rng& rng) {
  TagData d;
  std::uniform_int_distribution<int> filler(11, 19), len(1, 4);
  for (int i = 0; i < n; ++i) {
    std::vector<int> ids{filler(rng), 10};
    std::vector<int> tags{0, 1};
    const int l = len(rng);
    for (int t = 0; t < l; ++t) {
      ids.push_back(filler(rng));
      tags.push_back(t == 0 ? 3 : 4);
    }
    d.ids.push_back(ids);
    d.tags.push_back(tags);
  }
  return d;
}

inline Toy make_toy(int train = 40, int aux_train = 30) {
  Rng rng(123);
  Toy toy;
  toy.main.train = make_sentiment(train, rng);
  toy.main.dev = make_sentiment(20, rng);
  toy.main.test = make_sentiment(20, rng);
  toy.main.class_names = {"neg", "pos"};
  toy.aux.train = make_tags(aux_train, rng);
  toy.aux.dev = make_tags(10, rng);
  toy.aux.test = make_tags(10, rng);
  toy.aux.label_names = neg_label_names();
  toy.embeddings = Matrix(20, 6);
  nn::uniform_fill(toy.embeddings, 0.5, rng);
  toy.embeddings.row(0).setZero();
  return toy;
}

}  // namespace negsent::toy

#endif  // NEGSENT_TESTS_TOY_DATA_HPP_
