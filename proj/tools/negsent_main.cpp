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

// negsent command-line tool.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "negsent/experiment.hpp"

namespace {

using nlohmann::json;
namespace exp = negsent::exp;
namespace fs = std::filesystem;

struct SpecArgs {
  std::string config;
  std::string label, mode, main, aux, label_filter, embeddings, lexicon;
  std::optional<int> epochs, batch_size;
  std::optional<double> lr;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> main_size, aux_size;
  bool phrase = false;
  std::vector<std::string> sets;
};

void add_spec_options(CLI::App* cmd, SpecArgs& a) {
  cmd->add_option("--config", a.config, "JSON experiment spec")->check(CLI::ExistingFile);
  cmd->add_option("--label", a.label, "Row label in result tables");
  cmd->add_option("--mode", a.mode, "stl | mtl | heur | transfer | negation");
  cmd->add_option("--main", a.main, "sst-binary | sst-fine | semeval-binary | semeval-fine");
  cmd->add_option("--aux", a.aux, "sfu | cd | sfu+cd | tagged:<name>");
  cmd->add_option("--label-filter", a.label_filter, "both | cues-only | scopes-only");
  cmd->add_option("--epochs", a.epochs);
  cmd->add_option("--lr", a.lr, "Learning rate");
  cmd->add_option("--batch-size", a.batch_size);
  cmd->add_option("--seeds", a.seeds, "Run seeds");
  cmd->add_option("--main-size", a.main_size, "Subsample the main training set");
  cmd->add_option("--aux-size", a.aux_size, "Subsample the auxiliary training set");
  cmd->add_flag("--phrase", a.phrase, "Train on phrase-level SST");
  cmd->add_option("--embeddings", a.embeddings, "Embedding file (default <data>/embeddings.txt)");
  cmd->add_option("--lexicon", a.lexicon, "Cue lexicon (default <data>/lexicon.txt)");
  cmd->add_option("--set", a.sets, "Override any spec key, e.g. --set train.hidden=50");
}

exp::ExperimentSpec build_spec(const SpecArgs& a) {
  json j = json::object();
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw negsent::ParseError(a.config, 0, "not valid JSON");
  }
  const auto set = [&](const std::string& key, json value) {
    json* node = &j;
    std::size_t start = 0;
    for (auto dot = key.find('.'); dot != std::string::npos; dot = key.find('.', start)) {
      node = &(*node)[key.substr(start, dot - start)];
      start = dot + 1;
    }
    (*node)[key.substr(start)] = std::move(value);
  };
  if (!a.label.empty()) set("label", a.label);
  if (!a.mode.empty()) set("train.mode", a.mode);
  if (!a.main.empty()) set("main", a.main);
  if (!a.aux.empty()) set("train.aux_corpus", a.aux);
  if (!a.label_filter.empty()) set("train.aux_label_filter", a.label_filter);
  if (a.epochs) set("train.epochs", *a.epochs);
  if (a.lr) set("train.lr", *a.lr);
  if (a.batch_size) set("train.batch_size", *a.batch_size);
  if (!a.seeds.empty()) set("train.seeds", a.seeds);
  if (a.main_size) set("main_size", *a.main_size);
  if (a.aux_size) set("aux_size", *a.aux_size);
  if (a.phrase) set("phrase", true);
  if (!a.embeddings.empty()) set("embeddings", a.embeddings);
  if (!a.lexicon.empty()) set("lexicon", a.lexicon);
  for (const auto& s : a.sets) exp::apply_override(j, s);
  auto spec = j.get<exp::ExperimentSpec>();
  spec.validate();
  return spec;
}

fs::path data_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(exp::kDataRootEnv)) return env;
  throw negsent::UsageError(std::string("no data root: pass --data or set ") + exp::kDataRootEnv);
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Negation as an auxiliary task for sentiment classification"};
  app.require_subcommand(1);
  std::string data;
  app.add_option("--data", data, "Prepared data root (default $NEGSENT_DATA)");

  SpecArgs train_args;
  std::string out;
  int workers = 1;
  bool resume = false;
  auto* train = app.add_subcommand("train", "Train every seed of one experiment");
  add_spec_options(train, train_args);
  train->add_option("--out", out, "Run directory")->required();
  train->add_option("--workers", workers, "Seeds trained in parallel")->check(CLI::PositiveNumber);
  train->add_flag("--resume", resume, "Continue an existing run directory");

  std::string run_dir;
  bool silver = false;
  auto* evaluate = app.add_subcommand("evaluate", "Recompute metrics from a run directory");
  evaluate->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  evaluate->add_flag("--silver", silver, "Split the test set into negated and non-negated parts");

  SpecArgs ablate_args;
  std::string suite;
  auto* ablate = app.add_subcommand("ablate", "Run an ablation suite");
  add_spec_options(ablate, ablate_args);
  ablate->add_option("--suite", suite)->required()->check(CLI::IsMember(exp::suite_names()));
  ablate->add_option("--out", out, "Suite directory")->required();
  ablate->add_option("--workers", workers, "Seeds trained in parallel")->check(CLI::PositiveNumber);
  ablate->add_flag("--resume", resume, "Continue existing run directories");

  std::string run_a, run_b, report;
  int iterations = 10000;
  std::uint64_t test_seed = 1;
  auto* significance = app.add_subcommand("significance", "Paired approximate randomization tests");
  significance->add_option("--a", run_a, "Run directory A")->required()->check(CLI::ExistingDirectory);
  significance->add_option("--b", run_b, "Run directory B")->required()->check(CLI::ExistingDirectory);
  significance->add_option("--iterations", iterations)->check(CLI::PositiveNumber);
  significance->add_option("--seed", test_seed, "Randomization seed");
  significance->add_option("--out", report, "Write the JSON report here");

  std::string filter = "both";
  auto* stats = app.add_subcommand("stats", "Label entropy and kurtosis of auxiliary corpora");
  stats->add_option("--label-filter", filter, "both | cues-only | scopes-only");
  stats->add_option("--out", report, "Write the JSON report here");

  exp::PrepareInputs prep;
  std::vector<std::string> tagged;
  auto* prepare = app.add_subcommand("prepare", "Write canonical splits into the data root");
  prepare->add_option("--sfu-xml", prep.sfu_xml, "SFU Review Corpus XML directory");
  prepare->add_option("--sfu-split", prep.sfu_split, "Reuse this SFU split file");
  prepare->add_option("--cd-train", prep.cd_train, "ConanDoyle-neg training file");
  prepare->add_option("--cd-dev", prep.cd_dev, "ConanDoyle-neg development file");
  prepare->add_option("--cd-test", prep.cd_test, "ConanDoyle-neg test file");
  prepare->add_option("--sst", prep.sst, "SST tree directory with {train,dev,test}.txt");
  prepare->add_option("--semeval", prep.semeval, "SemEval directory with {train,dev,test}.tsv");
  prepare->add_option("--tagged", tagged, "Generic tagged corpus as name=directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const auto spec = build_spec(train_args);
      exp::run_experiment(spec, data_root(data), out, {workers, resume, &std::cerr});
      std::cout << std::ifstream(fs::path(out) / "aggregate.tsv").rdbuf();
    } else if (*evaluate) {
      const fs::path root = silver ? data_root(data) : fs::path(data);
      std::cout << exp::evaluate_run(run_dir, root, silver).dump(2) << "\n";
    } else if (*ablate) {
      const auto table = exp::run_suite(suite, build_spec(ablate_args), data_root(data), out,
                                        {workers, resume, &std::cerr});
      std::cout << exp::emit_table(table).text;
    } else if (*significance) {
      const auto r = exp::compare_runs(run_a, run_b, iterations, test_seed);
      const json j = exp::significance_record(r);
      write_json(report, j);
      std::cout << j.dump(2) << "\n";
    } else if (*stats) {
      const json j = exp::corpus_statistics(data_root(data), negsent::parse_label_filter(filter));
      write_json(report, j);
      std::cout << j.dump(2) << "\n";
    } else if (*prepare) {
      for (const auto& t : tagged) {
        const auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw negsent::UsageError("--tagged expects name=directory, got '" + t + "'");
        }
        prep.tagged.emplace_back(t.substr(0, eq), t.substr(eq + 1));
      }
      std::cout << exp::prepare_data(prep, data_root(data)).dump(2) << "\n";
    }
  } catch (const negsent::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const negsent::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
