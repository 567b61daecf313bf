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

#include "negsent/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "negsent/sfu.hpp"

namespace negsent::exp {

using nlohmann::json;

namespace {

const std::vector<std::string> kSplits = {"train", "dev", "test"};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string join(const std::vector<std::string>& tokens, char sep = ' ') {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- dataset registry ---------------------------------------------------------

struct MainSource {
  Granularity granularity;
  Unit unit;
  std::string phrase_dir;  // empty when the dataset has no phrase-level data
};

MainSource main_source(const std::string& name) {
  if (name == "sst-binary") return {Granularity::kBinary, Unit::kSentence, "sst-phrase-binary"};
  if (name == "sst-fine") return {Granularity::kFine, Unit::kSentence, "sst-phrase-fine"};
  if (name == "semeval-binary") return {Granularity::kBinary, Unit::kTweet, ""};
  if (name == "semeval-fine") return {Granularity::kFine, Unit::kTweet, ""};
  throw UsageError("unknown main dataset '" + name + "'");
}

std::vector<SentimentExample> load_main_split(const fs::path& root, const std::string& name,
                                              const std::string& split, bool phrase) {
  const MainSource src = main_source(name);
  if (phrase && split == "train") {
    return load_sentiment(root / "sentiment" / src.phrase_dir / "train.txt", src.granularity,
                          Unit::kPhrase);
  }
  return load_sentiment(root / "sentiment" / name / (split + ".txt"), src.granularity, src.unit);
}

bool is_tagged(const std::string& aux) { return aux.rfind("tagged:", 0) == 0; }

void check_aux_name(const std::string& aux) {
  if (aux == "sfu" || aux == "cd" || aux == "sfu+cd") return;
  if (is_tagged(aux) && aux.size() > 7) return;
  throw UsageError("unknown auxiliary corpus '" + aux + "' (sfu, cd, sfu+cd, tagged:<name>)");
}

std::vector<NegSentence> load_negation_split(const fs::path& root, const std::string& corpus,
                                             const std::string& split) {
  const auto one = [&](const std::string& c) {
    return load_negation_conll(root / "negation" / c / (split + ".conll"),
                               c == "sfu" ? CorpusId::kSfu : CorpusId::kCd);
  };
  if (corpus == "sfu+cd") return combine_corpora(one("sfu"), one("cd"));
  return one(corpus);
}

// Tokens and string labels of one split of an auxiliary corpus.
struct AuxSplit {
  std::vector<std::vector<std::string>> tokens;
  std::vector<std::vector<std::string>> labels;
};

AuxSplit load_aux_split(const fs::path& root, const std::string& corpus, const std::string& split,
                        LabelFilter filter) {
  AuxSplit out;
  if (is_tagged(corpus)) {
    for (auto& s : load_tagged(root / "tagged" / corpus.substr(7) / (split + ".tsv"))) {
      out.tokens.push_back(std::move(s.tokens));
      out.labels.push_back(std::move(s.labels));
    }
    return out;
  }
  for (const auto& s : negated_only(load_negation_split(root, corpus, split))) {
    std::vector<std::string> labels;
    for (NegLabel l : filter_labels(to_bio(s), filter)) labels.emplace_back(neg_label_name(l));
    out.tokens.push_back(s.tokens);
    out.labels.push_back(std::move(labels));
  }
  return out;
}

// Negation corpora use the fixed joint inventory; generic corpora put O first
// and the remaining labels in order of appearance.
std::vector<std::string> aux_inventory(const std::string& corpus,
                                       const std::vector<const AuxSplit*>& splits) {
  if (!is_tagged(corpus)) return neg_label_names();
  std::vector<std::string> names{"O"};
  std::set<std::string> seen{"O"};
  for (const auto* s : splits) {
    for (const auto& seq : s->labels) {
      for (const auto& l : seq) {
        if (seen.insert(l).second) names.push_back(l);
      }
    }
  }
  return names;
}

TagData encode_aux(const AuxSplit& s, const Vocabulary& vocab,
                   const std::vector<std::string>& inventory) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < inventory.size(); ++i) index[inventory[i]] = static_cast<int>(i);
  TagData d;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    d.ids.push_back(vocab.encode(s.tokens[i]));
    std::vector<int> tags;
    for (const auto& l : s.labels[i]) tags.push_back(index.at(l));
    d.tags.push_back(std::move(tags));
  }
  return d;
}

SentimentData encode_main(const std::vector<SentimentExample>& data, const Vocabulary& vocab,
                          const CueLexicon* lex) {
  SentimentData d;
  for (const auto& e : data) {
    d.ids.push_back(vocab.encode(e.tokens));
    if (lex) d.flags.push_back(heur_flag_ids(e.tokens, *lex));
    d.labels.push_back(e.label);
  }
  return d;
}

bool uses_aux(Mode m) { return m == Mode::kMtl || m == Mode::kTransfer || m == Mode::kNegation; }

fs::path resolve(const fs::path& root, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : root / p;
}

std::optional<fs::path> embedding_file(const ExperimentSpec& spec, const fs::path& root) {
  if (!spec.embeddings.empty()) return resolve(root, spec.embeddings);
  if (fs::exists(root / "embeddings.txt")) return root / "embeddings.txt";
  return std::nullopt;
}

fs::path lexicon_file(const ExperimentSpec& spec, const fs::path& root) {
  return spec.lexicon.empty() ? root / "lexicon.txt" : resolve(root, spec.lexicon);
}

template <typename T>
std::vector<T> maybe_subsample(const std::vector<T>& data, std::optional<std::size_t> n,
                               std::uint64_t seed, const char* what) {
  if (!n) return data;
  if (*n > data.size()) {
    throw UsageError(std::string(what) + " subsample of " + std::to_string(*n) +
                     " exceeds the training set size " + std::to_string(data.size()));
  }
  return subsample(data, *n, seed);
}

std::string sanitize(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ||
                    c == '_' || c == '+';
    if (!ok) c = '_';
  }
  return out;
}

}  // namespace

const std::vector<std::string>& main_dataset_names() {
  static const std::vector<std::string> names = {"sst-binary", "sst-fine", "semeval-binary",
                                                 "semeval-fine"};
  return names;
}

// --- spec -----------------------------------------------------------------------

void ExperimentSpec::validate() const {
  train.validate();
  if (train.mode == Mode::kNegation) {
    if (!main.empty()) throw UsageError("negation runs take no main dataset");
    if (phrase || main_size) throw UsageError("phrase and main_size need a main dataset");
  } else {
    main_source(main);
    if (phrase && main_source(main).phrase_dir.empty()) {
      throw UsageError("phrase-level training data exists only for SST");
    }
  }
  if (uses_aux(train.mode)) {
    check_aux_name(train.aux_corpus);
    if (is_tagged(train.aux_corpus) && train.aux_label_filter != LabelFilter::kBoth) {
      throw UsageError("label filters apply to negation corpora only");
    }
  } else if (aux_size) {
    throw UsageError("aux_size needs an auxiliary corpus");
  }
  if (main_size && *main_size == 0) throw UsageError("main_size must be positive");
  if (aux_size && *aux_size == 0) throw UsageError("aux_size must be positive");
}

void to_json(json& j, const ExperimentSpec& s) {
  j = json{{"label", s.label},
           {"main", s.main},
           {"train", s.train},
           {"phrase", s.phrase},
           {"main_size", s.main_size ? json(*s.main_size) : json(nullptr)},
           {"aux_size", s.aux_size ? json(*s.aux_size) : json(nullptr)},
           {"subsample_seed", s.subsample_seed},
           {"embeddings", s.embeddings},
           {"lexicon", s.lexicon}};
}

void from_json(const json& j, ExperimentSpec& s) {
  if (!j.is_object()) throw UsageError("experiment spec must be a JSON object");
  static const std::set<std::string> known = {"label",    "main",           "train",
                                              "phrase",   "main_size",      "aux_size",
                                              "subsample_seed", "embeddings", "lexicon"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw UsageError("unknown spec key '" + key + "'");
  }
  try {
    if (j.contains("label")) j.at("label").get_to(s.label);
    if (j.contains("main")) j.at("main").get_to(s.main);
    if (j.contains("train")) j.at("train").get_to(s.train);
    if (j.contains("phrase")) j.at("phrase").get_to(s.phrase);
    const auto size = [&](const char* key, std::optional<std::size_t>& out) {
      if (!j.contains(key)) return;
      if (j.at(key).is_null()) {
        out.reset();
      } else {
        out = j.at(key).get<std::size_t>();
      }
    };
    size("main_size", s.main_size);
    size("aux_size", s.aux_size);
    if (j.contains("subsample_seed")) j.at("subsample_seed").get_to(s.subsample_seed);
    if (j.contains("embeddings")) j.at("embeddings").get_to(s.embeddings);
    if (j.contains("lexicon")) j.at("lexicon").get_to(s.lexicon);
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad experiment spec: ") + e.what());
  }
}

void apply_override(json& spec, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &spec;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw UsageError("override key '" + key + "' is malformed");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

// --- data -----------------------------------------------------------------------

std::size_t main_train_size(const ExperimentSpec& spec, const fs::path& root) {
  return load_main_split(root, spec.main, "train", spec.phrase).size();
}

LoadedData load_data(const ExperimentSpec& spec, const fs::path& root) {
  spec.validate();
  const TrainConfig& cfg = spec.train;
  LoadedData out;

  std::vector<std::vector<SentimentExample>> main_splits;
  if (cfg.mode != Mode::kNegation) {
    for (const auto& split : kSplits) main_splits.push_back(load_main_split(root, spec.main, split, spec.phrase));
    main_splits[0] = maybe_subsample(main_splits[0], spec.main_size, spec.subsample_seed, "main");
    const MainSource src = main_source(spec.main);
    out.main.class_names = sentiment_label_names(src.granularity, src.unit);
    for (const auto& e : main_splits[2]) out.test_tokens.push_back(e.tokens);
  }

  std::vector<AuxSplit> aux_splits;
  if (uses_aux(cfg.mode)) {
    for (const auto& split : kSplits) {
      aux_splits.push_back(load_aux_split(root, cfg.aux_corpus, split, cfg.aux_label_filter));
    }
    if (spec.aux_size) {
      AuxSplit& train = aux_splits[0];
      const auto idx = subsample_indices(train.tokens.size(), *spec.aux_size, spec.subsample_seed);
      AuxSplit sub;
      for (auto i : idx) {
        sub.tokens.push_back(train.tokens[i]);
        sub.labels.push_back(train.labels[i]);
      }
      train = std::move(sub);
    }
  }

  // Training tokens define the vocabulary; dev and test tokens join it only
  // when they have a pretrained vector.
  std::vector<std::vector<std::string>> train_tokens;
  if (!main_splits.empty()) {
    for (const auto& e : main_splits[0]) train_tokens.push_back(e.tokens);
  }
  if (!aux_splits.empty()) {
    train_tokens.insert(train_tokens.end(), aux_splits[0].tokens.begin(), aux_splits[0].tokens.end());
  }
  out.vocab = build_vocab(train_tokens);
  const auto emb_path = embedding_file(spec, root);
  if (emb_path) {
    const auto words = embedding_words(*emb_path);
    const std::unordered_set<std::string> known(words.begin(), words.end());
    const auto admit = [&](const std::vector<std::string>& tokens) {
      for (const auto& t : tokens) {
        if (out.vocab.find(t) >= 0 || out.vocab.find(to_lower(t)) >= 0) continue;
        if (known.count(t) || known.count(to_lower(t))) out.vocab.add(t);
      }
    };
    for (std::size_t s = 1; s < 3; ++s) {
      if (!main_splits.empty()) {
        for (const auto& e : main_splits[s]) admit(e.tokens);
      }
      if (!aux_splits.empty()) {
        for (const auto& t : aux_splits[s].tokens) admit(t);
      }
    }
    out.embeddings = load_embeddings(*emb_path, out.vocab, cfg.embedding_dim, 1);
  } else {
    out.embeddings = random_embeddings(out.vocab, cfg.embedding_dim, 1);
  }

  std::optional<CueLexicon> lex;
  if (cfg.mode == Mode::kHeur) lex = load_cue_lexicon(lexicon_file(spec, root));
  if (!main_splits.empty()) {
    const CueLexicon* l = lex ? &*lex : nullptr;
    out.main.train = encode_main(main_splits[0], out.vocab, l);
    out.main.dev = encode_main(main_splits[1], out.vocab, l);
    out.main.test = encode_main(main_splits[2], out.vocab, l);
  }
  if (!aux_splits.empty()) {
    out.aux.label_names =
        aux_inventory(cfg.aux_corpus, {&aux_splits[0], &aux_splits[1], &aux_splits[2]});
    out.aux.train = encode_aux(aux_splits[0], out.vocab, out.aux.label_names);
    out.aux.dev = encode_aux(aux_splits[1], out.vocab, out.aux.label_names);
    out.aux.test = encode_aux(aux_splits[2], out.vocab, out.aux.label_names);
  }
  return out;
}

// --- runs -----------------------------------------------------------------------

namespace {

fs::path seed_dir(const fs::path& out, std::uint64_t seed) {
  return out / ("seed-" + std::to_string(seed));
}

TrainedRun train_seed(const ExperimentSpec& spec, const LoadedData& data, std::uint64_t seed) {
  const TrainConfig& cfg = spec.train;
  const Matrix emb = reseed_fallback(data.embeddings, seed).vectors;
  switch (cfg.mode) {
    case Mode::kStl:
    case Mode::kHeur:
      return train_stl(cfg, data.main, emb, seed);
    case Mode::kMtl:
      return train_mtl(cfg, data.main, data.aux, emb, seed);
    case Mode::kTransfer:
      return train_transfer(cfg, data.aux, data.main, emb, seed);
    case Mode::kNegation:
      return train_negation(cfg, data.aux, emb, seed);
  }
  throw UsageError("unhandled mode");
}

std::string label_lines(const std::vector<int>& ids, const std::vector<std::string>& names) {
  std::string out;
  for (int id : ids) out += names.at(static_cast<std::size_t>(id)) + "\n";
  return out;
}

void write_seed(const fs::path& dir, const ExperimentSpec& spec, const LoadedData& data,
                std::uint64_t seed, TrainedRun& run) {
  const RunResult& r = run.result;
  const bool negation = spec.train.mode == Mode::kNegation;
  const auto& names = negation ? data.aux.label_names : data.main.class_names;

  json config{{"spec", spec},
              {"seed", seed},
              {"model", run.model.config()},
              {"vocabulary_size", data.vocab.size()},
              {"pretrained_rows", data.embeddings.found}};
  write_file(dir / "config.json", config.dump(2) + "\n");

  std::string log;
  for (std::size_t e = 0; e < r.dev_scores.size(); ++e) {
    log += "epoch=" + std::to_string(e + 1) + " train_loss=" + number(r.train_loss.at(e)) +
           " dev_" + r.metric + "=" + number(r.dev_scores[e]) + "\n";
  }
  log += "selected_epoch=" + std::to_string(r.selected_epoch) + " test_" + r.metric + "=" +
         number(r.test_score) + "\n";
  if (r.aux_cue) log += "aux_cue_f1=" + number(r.aux_cue->f1) + "\n";
  if (r.aux_scope) log += "aux_scope_f1=" + number(r.aux_scope->f1) + "\n";
  for (const auto& [cls, acc] : r.per_class) {
    log += "class_" + names.at(static_cast<std::size_t>(cls)) + "=" + number(acc) + "\n";
  }
  write_file(dir / "metrics.log", log);

  write_file(dir / "predictions.txt", label_lines(r.test_predictions, names));
  write_file(dir / "gold.txt", label_lines(r.test_gold, names));

  Checkpoint meta;
  meta.model_config = run.model.config();
  meta.run_config = config;
  meta.vocabulary = data.vocab.tokens();
  meta.class_names = data.main.class_names;
  meta.aux_label_names = run.model.config().aux_label_names;
  save_checkpoint(dir / "best.ckpt", run.model, meta);

  json result{{"result", r},
              {"class_names", data.main.class_names},
              {"aux_label_names", data.aux.label_names}};
  write_file(dir / "result.json", result.dump(2) + "\n");
  write_file(dir / "DONE", "");
}

struct StoredResult {
  RunResult result;
  std::vector<std::string> class_names;
  std::vector<std::string> aux_label_names;
};

StoredResult read_result(const fs::path& dir) {
  const json j = read_json(dir / "result.json");
  StoredResult s;
  s.result = j.at("result").get<RunResult>();
  j.at("class_names").get_to(s.class_names);
  j.at("aux_label_names").get_to(s.aux_label_names);
  return s;
}

AggregateResult aggregate_values(const std::vector<std::pair<std::uint64_t, double>>& values) {
  std::vector<RunResult> runs;
  for (const auto& [seed, v] : values) {
    RunResult r;
    r.seed = seed;
    r.test_score = v;
    runs.push_back(r);
  }
  if (runs.size() >= 2) return aggregate_runs(runs);
  AggregateResult agg;
  agg.runs = runs;
  agg.mean = runs.empty() ? std::numeric_limits<double>::quiet_NaN() : runs[0].test_score;
  agg.std = std::numeric_limits<double>::quiet_NaN();
  return agg;
}

AggregateResult aggregate_stored(const std::vector<StoredResult>& stored) {
  std::vector<std::pair<std::uint64_t, double>> v;
  for (const auto& s : stored) v.emplace_back(s.result.seed, s.result.test_score);
  AggregateResult agg = aggregate_values(v);
  for (std::size_t i = 0; i < stored.size(); ++i) agg.runs[i] = stored[i].result;
  return agg;
}

void write_table_files(const fs::path& dir, const std::string& stem, const Table& table) {
  const EmittedTable t = emit_table(table);
  write_file(dir / (stem + ".tsv"), t.text);
  write_file(dir / (stem + ".json"), t.record.dump(2) + "\n");
}

void prepare_output(const fs::path& out, const json& spec_json, bool resume) {
  if (fs::exists(out) && !fs::is_directory(out)) {
    throw UsageError(out.string() + " exists and is not a directory");
  }
  if (!fs::exists(out) || fs::is_empty(out)) {
    fs::create_directories(out);
    write_file(out / "spec.json", spec_json.dump(2) + "\n");
    return;
  }
  if (!fs::exists(out / "spec.json")) {
    throw UsageError(out.string() + " is not empty and holds no spec.json; refusing to use it");
  }
  if (read_json(out / "spec.json") != spec_json) {
    throw UsageError(out.string() + " holds a different experiment; refusing to mix runs");
  }
  if (!resume) {
    throw UsageError(out.string() + " already holds this experiment; pass --resume to continue it");
  }
}

}  // namespace

AggregateResult run_experiment(const ExperimentSpec& spec, const fs::path& root,
                               const fs::path& out, const RunOptions& options) {
  spec.validate();
  prepare_output(out, json(spec), options.resume);
  const std::string name = spec.label.empty() ? out.filename().string() : spec.label;

  std::mutex log_mutex;
  const auto say = [&](const std::string& msg) {
    if (!options.log) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    *options.log << "[" << name << "] " << msg << std::endl;
  };

  std::vector<std::uint64_t> pending;
  for (auto seed : spec.train.seeds) {
    if (fs::exists(seed_dir(out, seed) / "DONE")) {
      say("seed " + std::to_string(seed) + ": finished earlier, reusing");
    } else {
      pending.push_back(seed);
    }
  }

  if (!pending.empty()) {
    const LoadedData data = load_data(spec, root);
    say("vocabulary " + std::to_string(data.vocab.size()) + ", pretrained rows " +
        std::to_string(data.embeddings.found));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= pending.size()) return;
        const std::uint64_t seed = pending[i];
        try {
          const fs::path dir = seed_dir(out, seed);
          fs::remove_all(dir);
          fs::create_directories(dir);
          say("seed " + std::to_string(seed) + ": training");
          TrainedRun run = train_seed(spec, data, seed);
          write_seed(dir, spec, data, seed, run);
          say("seed " + std::to_string(seed) + ": test " + run.result.metric + " " +
              number(run.result.test_score) + " (epoch " +
              std::to_string(run.result.selected_epoch) + ")");
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const int n = std::clamp(options.workers, 1, static_cast<int>(pending.size()));
    std::vector<std::thread> threads;
    for (int t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<StoredResult> stored;
  for (auto seed : spec.train.seeds) stored.push_back(read_result(seed_dir(out, seed)));
  const AggregateResult agg = aggregate_stored(stored);
  write_table_files(out, "aggregate", experiment_table(name, agg, stored.front().class_names));
  return agg;
}

// --- tables ---------------------------------------------------------------------

std::string format_cell(double mean, double std) {
  char buf[64];
  if (std::isnan(std)) {
    std::snprintf(buf, sizeof buf, "%.2f (-)", mean);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f (%.1f)", mean, std);
  }
  return buf;
}

Table experiment_table(const std::string& label, const AggregateResult& agg,
                       const std::vector<std::string>& class_names) {
  Table t;
  const std::string metric = agg.runs.empty() ? "accuracy" : agg.runs.front().metric;
  t.columns.push_back(metric);
  std::map<std::string, AggregateResult> cells{{metric, agg}};

  for (std::size_t c = 0; c < class_names.size(); ++c) {
    const std::string col = "class:" + class_names[c];
    t.columns.push_back(col);
    std::vector<std::pair<std::uint64_t, double>> values;
    for (const auto& r : agg.runs) {
      const auto it = r.per_class.find(static_cast<int>(c));
      if (it != r.per_class.end()) values.emplace_back(r.seed, it->second);
    }
    if (!values.empty()) cells[col] = aggregate_values(values);
  }

  const auto aux_column = [&](const char* col, std::optional<Prf> RunResult::*field) {
    t.columns.push_back(col);
    std::vector<std::pair<std::uint64_t, double>> values;
    for (const auto& r : agg.runs) {
      if (r.*field) values.emplace_back(r.seed, (r.*field)->f1);
    }
    if (!values.empty()) cells[col] = aggregate_values(values);
  };
  aux_column("aux:cue_f1", &RunResult::aux_cue);
  aux_column("aux:scope_f1", &RunResult::aux_scope);

  t.rows.emplace_back(label, std::move(cells));
  return t;
}

EmittedTable emit_table(const Table& table) {
  std::vector<std::string> columns;
  for (const auto& col : table.columns) {
    const bool used = std::any_of(table.rows.begin(), table.rows.end(),
                                  [&](const auto& row) { return row.second.count(col) > 0; });
    if (used) columns.push_back(col);
  }

  EmittedTable out;
  out.text = "model";
  for (const auto& col : columns) out.text += "\t" + col;
  out.text += "\n";
  json rows = json::array();
  for (const auto& [label, cells] : table.rows) {
    out.text += label;
    json jcells = json::object();
    for (const auto& col : columns) {
      out.text += "\t";
      const auto it = cells.find(col);
      if (it == cells.end()) continue;
      const AggregateResult& a = it->second;
      out.text += format_cell(100.0 * a.mean, 100.0 * a.std);
      json values = json::array();
      json seeds = json::array();
      for (const auto& r : a.runs) {
        values.push_back(r.test_score);
        seeds.push_back(r.seed);
      }
      jcells[col] = {{"mean", a.mean},
                     {"std", std::isnan(a.std) ? json(nullptr) : json(a.std)},
                     {"seeds", seeds},
                     {"values", values}};
    }
    out.text += "\n";
    rows.push_back({{"label", label}, {"cells", jcells}});
  }
  out.record = {{"columns", columns},
                {"rows", rows},
                {"display", "percent; mean with 2 decimals, sample std with 1 decimal"}};
  return out;
}

// --- ablations ------------------------------------------------------------------

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"aux-curve", "main-curve",  "combined",
                                                 "cues-scopes", "phrase",    "transfer",
                                                 "generic-aux"};
  return names;
}

std::vector<ExperimentSpec> ablation_suite(const std::string& suite, const ExperimentSpec& base,
                                           const fs::path& root) {
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end()) {
    throw UsageError("unknown suite '" + suite + "'");
  }
  if (base.main.empty()) throw UsageError("ablation suites need a main dataset");
  const std::string aux = base.train.aux_corpus.empty() ? "sfu" : base.train.aux_corpus;

  const auto variant = [&](Mode mode, const std::string& label) {
    ExperimentSpec s = base;
    s.label = label;
    s.train.mode = mode;
    s.train.aux_corpus = uses_aux(mode) ? aux : "";
    if (!uses_aux(mode)) s.aux_size.reset();
    return s;
  };

  std::vector<ExperimentSpec> out;
  if (suite == "aux-curve") {
    std::vector<std::size_t> grid{10};
    for (std::size_t n = 100; n <= 800; n += 100) grid.push_back(n);
    for (auto n : grid) {
      auto s = variant(Mode::kMtl, "mtl-aux" + std::to_string(n));
      s.aux_size = n;
      out.push_back(s);
    }
  } else if (suite == "main-curve") {
    std::vector<std::size_t> grid{100, 500};
    for (std::size_t n = 1000; n <= 8000; n += 1000) grid.push_back(n);
    ExperimentSpec probe = base;
    probe.main_size.reset();
    const std::size_t available = main_train_size(probe, root);
    for (auto n : grid) {
      if (n > available) continue;
      for (Mode m : {Mode::kStl, Mode::kMtl}) {
        auto s = variant(m, mode_name(m) + "-main" + std::to_string(n));
        s.main_size = n;
        out.push_back(s);
      }
    }
  } else if (suite == "combined") {
    out.push_back(variant(Mode::kStl, "stl"));
    for (const char* a : {"sfu", "cd", "sfu+cd"}) {
      auto s = variant(Mode::kMtl, std::string("mtl-") + a);
      s.train.aux_corpus = a;
      out.push_back(s);
    }
  } else if (suite == "cues-scopes") {
    out.push_back(variant(Mode::kStl, "stl"));
    for (LabelFilter f : {LabelFilter::kBoth, LabelFilter::kCuesOnly, LabelFilter::kScopesOnly}) {
      auto s = variant(Mode::kMtl, "mtl-" + label_filter_name(f));
      s.train.aux_label_filter = f;
      out.push_back(s);
    }
  } else if (suite == "phrase") {
    for (bool phrase : {false, true}) {
      for (Mode m : {Mode::kStl, Mode::kMtl}) {
        auto s = variant(m, mode_name(m) + (phrase ? "-phrase" : ""));
        s.phrase = phrase;
        out.push_back(s);
      }
    }
  } else if (suite == "transfer") {
    for (Mode m : {Mode::kStl, Mode::kTransfer, Mode::kMtl}) out.push_back(variant(m, mode_name(m)));
  } else {  // generic-aux
    out.push_back(variant(Mode::kStl, "stl"));
    out.push_back(variant(Mode::kMtl, "mtl-" + aux));
    std::vector<std::string> names;
    if (fs::is_directory(root / "tagged")) {
      for (const auto& e : fs::directory_iterator(root / "tagged")) {
        if (e.is_directory()) names.push_back(e.path().filename().string());
      }
    }
    std::sort(names.begin(), names.end());
    for (const auto& n : names) {
      auto s = variant(Mode::kMtl, "mtl-" + n);
      s.train.aux_corpus = "tagged:" + n;
      s.train.aux_label_filter = LabelFilter::kBoth;
      out.push_back(s);
    }
  }
  for (auto& s : out) s.validate();
  return out;
}

Table run_suite(const std::string& suite, const ExperimentSpec& base, const fs::path& root,
                const fs::path& out, const RunOptions& options) {
  const auto specs = ablation_suite(suite, base, root);
  fs::create_directories(out);
  Table table;
  for (const auto& spec : specs) {
    const AggregateResult agg = run_experiment(spec, root, out / sanitize(spec.label), options);
    const auto stored = read_result(seed_dir(out / sanitize(spec.label), spec.train.seeds.front()));
    Table one = experiment_table(spec.label, agg, stored.class_names);
    for (const auto& col : one.columns) {
      if (std::find(table.columns.begin(), table.columns.end(), col) == table.columns.end()) {
        table.columns.push_back(col);
      }
    }
    table.rows.push_back(std::move(one.rows.front()));
  }
  write_table_files(out, "table", table);
  return table;
}

// --- evaluation -----------------------------------------------------------------

std::vector<RunFiles> read_run(const fs::path& dir) {
  if (!fs::exists(dir / "spec.json")) throw UsageError(dir.string() + " is not a run directory");
  const ExperimentSpec spec = read_json(dir / "spec.json").get<ExperimentSpec>();
  std::vector<RunFiles> out;
  for (auto seed : spec.train.seeds) {
    const fs::path d = seed_dir(dir, seed);
    if (!fs::exists(d / "DONE")) continue;
    RunFiles f;
    f.seed = seed;
    f.predictions = read_lines(d / "predictions.txt");
    f.gold = read_lines(d / "gold.txt");
    if (f.predictions.size() != f.gold.size()) {
      throw ParseError((d / "predictions.txt").string(), 0, "prediction and gold counts differ");
    }
    out.push_back(std::move(f));
  }
  return out;
}

namespace {

std::vector<int> to_ids(const std::vector<std::string>& labels,
                        std::map<std::string, int>& index) {
  std::vector<int> out;
  for (const auto& l : labels) {
    const auto it = index.try_emplace(l, static_cast<int>(index.size())).first;
    out.push_back(it->second);
  }
  return out;
}

double accuracy_of(const std::vector<std::string>& pred, const std::vector<std::string>& gold,
                   const std::vector<std::size_t>* subset = nullptr) {
  std::size_t correct = 0, total = 0;
  const auto visit = [&](std::size_t i) {
    ++total;
    if (pred[i] == gold[i]) ++correct;
  };
  if (subset) {
    for (auto i : *subset) visit(i);
  } else {
    for (std::size_t i = 0; i < pred.size(); ++i) visit(i);
  }
  if (total == 0) throw UsageError("accuracy over an empty set");
  return static_cast<double>(correct) / static_cast<double>(total);
}

json aggregate_json(const std::vector<std::pair<std::uint64_t, double>>& values) {
  const AggregateResult a = aggregate_values(values);
  return {{"mean", a.mean}, {"std", std::isnan(a.std) ? json(nullptr) : json(a.std)}};
}

}  // namespace

json evaluate_run(const fs::path& dir, const fs::path& root, bool silver) {
  const ExperimentSpec spec = read_json(dir / "spec.json").get<ExperimentSpec>();
  const auto runs = read_run(dir);
  if (runs.empty()) throw UsageError(dir.string() + " has no finished seeds");
  const bool negation = spec.train.mode == Mode::kNegation;

  std::vector<std::size_t> negated, non_negated;
  if (silver) {
    if (negation) throw UsageError("silver splits apply to sentiment runs only");
    const CueLexicon lex = load_cue_lexicon(lexicon_file(spec, root));
    const auto test = load_main_split(root, spec.main, "test", false);
    if (test.size() != runs.front().gold.size()) {
      throw UsageError("test set under " + root.string() + " does not match the run's predictions");
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
      (has_cue(test[i].tokens, lex) ? negated : non_negated).push_back(i);
    }
  }

  json seeds = json::array();
  std::vector<std::pair<std::uint64_t, double>> scores, neg_scores, non_scores;
  for (const auto& run : runs) {
    const StoredResult stored = read_result(seed_dir(dir, run.seed));
    json s{{"seed", run.seed}};
    double score = 0.0;
    if (negation) {
      const auto& names = stored.aux_label_names;
      std::map<std::string, int> index;
      for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);
      const IdBatch pred{to_ids(run.predictions, index)};
      const IdBatch gold{to_ids(run.gold, index)};
      if (index.size() != names.size()) throw UsageError("unknown label in prediction files");
      const auto cats = label_categories(names);
      score = token_f1(pred, gold, cats, kAnyCategory).f1;
      s["token_f1"] = score;
      if (names == neg_label_names()) {
        s["cue_f1"] = token_f1(pred, gold, cats, 1).f1;
        s["scope_f1"] = token_f1(pred, gold, cats, 2).f1;
      }
    } else {
      score = accuracy_of(run.predictions, run.gold);
      s["accuracy"] = score;
      json per_class = json::object();
      for (const auto& name : stored.class_names) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < run.gold.size(); ++i) {
          if (run.gold[i] == name) idx.push_back(i);
        }
        if (!idx.empty()) per_class[name] = accuracy_of(run.predictions, run.gold, &idx);
      }
      s["per_class"] = per_class;
      if (silver) {
        json parts = json::object();
        if (!negated.empty()) {
          const double a = accuracy_of(run.predictions, run.gold, &negated);
          parts["negated"] = {{"size", negated.size()}, {"accuracy", a}};
          neg_scores.emplace_back(run.seed, a);
        }
        if (!non_negated.empty()) {
          const double a = accuracy_of(run.predictions, run.gold, &non_negated);
          parts["non_negated"] = {{"size", non_negated.size()}, {"accuracy", a}};
          non_scores.emplace_back(run.seed, a);
        }
        s["silver"] = parts;
      }
    }
    s["matches_result"] = score == stored.result.test_score;
    scores.emplace_back(run.seed, score);
    seeds.push_back(s);
  }

  json out{{"run", dir.string()},
           {"metric", negation ? "token_f1" : "accuracy"},
           {"seeds", seeds},
           {"aggregate", aggregate_json(scores)}};
  if (!neg_scores.empty()) out["silver_negated"] = aggregate_json(neg_scores);
  if (!non_scores.empty()) out["silver_non_negated"] = aggregate_json(non_scores);
  return out;
}

SignificanceResult compare_runs(const fs::path& a, const fs::path& b, int iterations,
                                std::uint64_t seed) {
  const auto ra = read_run(a);
  const auto rb = read_run(b);
  std::map<std::uint64_t, const RunFiles*> by_seed;
  for (const auto& r : rb) by_seed[r.seed] = &r;
  if (ra.size() != rb.size()) throw UsageError("runs have different sets of finished seeds");

  SignificanceResult out;
  out.iterations = iterations;
  for (const auto& x : ra) {
    const auto it = by_seed.find(x.seed);
    if (it == by_seed.end()) {
      throw UsageError("seed " + std::to_string(x.seed) + " is missing from " + b.string());
    }
    const RunFiles& y = *it->second;
    if (x.gold != y.gold) {
      throw UsageError("gold labels of seed " + std::to_string(x.seed) + " differ between runs");
    }
    std::map<std::string, int> index;
    const auto gold = to_ids(x.gold, index);
    const auto pa = to_ids(x.predictions, index);
    const auto pb = to_ids(y.predictions, index);
    out.seeds.push_back(x.seed);
    out.accuracy_a.push_back(accuracy(pa, gold));
    out.accuracy_b.push_back(accuracy(pb, gold));
    out.observed.push_back(correct_difference(pa, pb, gold));
    out.p_values.push_back(approx_rand_test(pa, pb, gold, iterations, seed));
  }
  out.significant = out.p_values.size() == 5 && significance_decision(out.p_values);
  return out;
}

json significance_record(const SignificanceResult& r) {
  return {{"seeds", r.seeds},
          {"accuracy_a", r.accuracy_a},
          {"accuracy_b", r.accuracy_b},
          {"observed_correct_difference", r.observed},
          {"p_values", r.p_values},
          {"iterations", r.iterations},
          {"significant", r.significant},
          {"rule", "at least 3 of 5 paired p-values below 0.01"}};
}

// --- preparation ----------------------------------------------------------------

namespace {

void write_sentiment(const fs::path& path, const std::vector<SentimentExample>& data) {
  std::string text;
  for (const auto& e : data) {
    text += sentiment_label_names(e.granularity, e.unit).at(static_cast<std::size_t>(e.label));
    text += "\t" + join(e.tokens) + "\n";
  }
  fs::create_directories(path.parent_path());
  write_file(path, text);
}

void write_conll(const fs::path& path, const std::vector<NegSentence>& data) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_negation_conll(out, data);
}

std::vector<SentimentExample> binary_of(const std::vector<SentimentExample>& data) {
  std::vector<SentimentExample> out;
  for (const auto& e : data) {
    if (auto b = to_binary(e)) out.push_back(std::move(*b));
  }
  return out;
}

json negation_counts(const std::vector<NegSentence>& data) {
  long negated = 0;
  for (const auto& s : data) negated += s.negated();
  return {{"sentences", data.size()}, {"negated", negated}};
}

}  // namespace

json prepare_data(const PrepareInputs& in, const fs::path& root) {
  json report = json::object();
  fs::create_directories(root);

  if (in.sfu_xml) {
    const auto docs = sfu::load_documents(*in.sfu_xml);
    std::vector<sfu::SplitEntry> split;
    if (in.sfu_split) {
      std::ifstream f(*in.sfu_split);
      if (!f) throw ParseError(in.sfu_split->string(), 0, "cannot open file");
      split = sfu::read_split(f, in.sfu_split->string());
    } else {
      split = sfu::make_split(docs);
    }
    fs::create_directories(root / "negation" / "sfu");
    std::ofstream sf(root / "negation" / "sfu" / "split.tsv");
    sfu::write_split(sf, split);
    json counts = json::object();
    for (const auto& s : kSplits) {
      const auto data = sfu::apply_split(docs, split, s);
      write_conll(root / "negation" / "sfu" / (s + ".conll"), data);
      counts[s] = negation_counts(data);
    }
    report["sfu"] = counts;
  }

  const std::array<const std::optional<fs::path>*, 3> cd{&in.cd_train, &in.cd_dev, &in.cd_test};
  if (in.cd_train || in.cd_dev || in.cd_test) {
    json counts = json::object();
    for (std::size_t i = 0; i < 3; ++i) {
      if (!*cd[i]) throw UsageError("CD preparation needs train, dev and test files");
      const auto data = load_negation_conll(**cd[i], CorpusId::kCd);
      write_conll(root / "negation" / "cd" / (kSplits[i] + ".conll"), data);
      counts[kSplits[i]] = negation_counts(data);
    }
    report["cd"] = counts;
  }

  if (in.sst) {
    json fine = json::object(), binary = json::object();
    for (const auto& s : kSplits) {
      const auto trees = load_treebank(*in.sst / (s + ".txt"));
      std::vector<SentimentExample> sentences;
      for (const auto& t : trees) {
        SentimentExample e;
        e.tokens = t.yield();
        e.label = t.label;
        sentences.push_back(std::move(e));
      }
      const auto bin = binary_of(sentences);
      write_sentiment(root / "sentiment" / "sst-fine" / (s + ".txt"), sentences);
      write_sentiment(root / "sentiment" / "sst-binary" / (s + ".txt"), bin);
      fine[s] = sentences.size();
      binary[s] = bin.size();
      if (s == "train") {
        const auto pf = extract_phrase_corpus(trees, Granularity::kFine);
        const auto pb = extract_phrase_corpus(trees, Granularity::kBinary);
        write_sentiment(root / "sentiment" / "sst-phrase-fine" / "train.txt", pf);
        write_sentiment(root / "sentiment" / "sst-phrase-binary" / "train.txt", pb);
        report["sst-phrase-fine"] = {{"train", pf.size()}};
        report["sst-phrase-binary"] = {{"train", pb.size()}};
      }
    }
    report["sst-fine"] = fine;
    report["sst-binary"] = binary;
  }

  if (in.semeval) {
    json fine = json::object(), binary = json::object();
    for (const auto& s : kSplits) {
      const auto data = load_sentiment(*in.semeval / (s + ".tsv"), Granularity::kFine, Unit::kTweet);
      const auto bin = binary_of(data);
      write_sentiment(root / "sentiment" / "semeval-fine" / (s + ".txt"), data);
      write_sentiment(root / "sentiment" / "semeval-binary" / (s + ".txt"), bin);
      fine[s] = data.size();
      binary[s] = bin.size();
    }
    report["semeval-fine"] = fine;
    report["semeval-binary"] = binary;
  }

  for (const auto& [name, dir] : in.tagged) {
    json counts = json::object();
    for (const auto& s : kSplits) {
      const auto data = load_tagged(dir / (s + ".tsv"));
      std::string text;
      for (const auto& sent : data) {
        for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
          text += sent.tokens[i] + "\t" + sent.labels[i] + "\n";
        }
        text += "\n";
      }
      fs::create_directories(root / "tagged" / name);
      write_file(root / "tagged" / name / (s + ".tsv"), text);
      counts[s] = data.size();
    }
    report["tagged:" + name] = counts;
  }

  const fs::path sfu_train = root / "negation" / "sfu" / "train.conll";
  if (in.sfu_xml || (!fs::exists(root / "lexicon.txt") && fs::exists(sfu_train))) {
    const CueLexicon lex = build_cue_lexicon(load_negation_conll(sfu_train, CorpusId::kSfu));
    std::ofstream out(root / "lexicon.txt");
    write_cue_lexicon(out, lex);
    report["lexicon"] = {{"cues", lex.size()}};
  }
  return report;
}

json corpus_statistics(const fs::path& root, LabelFilter filter) {
  const auto stats_json = [](const DatasetStats& s, std::size_t sentences) {
    return json{{"sentences", sentences},
                {"tokens", s.tokens},
                {"entropy", s.entropy},
                {"kurtosis", std::isnan(s.kurtosis) ? json(nullptr) : json(s.kurtosis)},
                {"label_counts", s.counts}};
  };

  json corpora = json::object();
  for (const char* c : {"sfu", "cd"}) {
    if (!fs::exists(root / "negation" / c / "train.conll")) continue;
    const auto train = negated_only(load_negation_split(root, c, "train"));
    if (train.empty()) continue;
    corpora[c] = stats_json(dataset_stats(train, filter), train.size());
  }
  if (fs::is_directory(root / "tagged")) {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root / "tagged")) {
      if (e.is_directory()) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      std::vector<std::vector<std::string>> labels;
      for (auto& s : load_tagged(d / "train.tsv")) labels.push_back(std::move(s.labels));
      if (labels.empty()) continue;
      corpora["tagged:" + d.filename().string()] = stats_json(dataset_stats(labels), labels.size());
    }
  }

  json silver = json::object();
  if (fs::exists(root / "lexicon.txt")) {
    const CueLexicon lex = load_cue_lexicon(root / "lexicon.txt");
    for (const char* name : {"sst-fine", "sst-binary"}) {
      if (!fs::exists(root / "sentiment" / name / "test.txt")) continue;
      const SilverSplit s = silver_split(load_main_split(root, name, "test", false), lex);
      silver[name] = {{"negated", s.negated.size()}, {"non_negated", s.non_negated.size()}};
    }
  }

  return {{"label_filter", label_filter_name(filter)},
          {"statistics", corpora},
          {"silver_split", silver},
          {"definitions",
           {{"subset", "negated training sentences for negation corpora, all training "
                       "sentences for tagged corpora"},
            {"entropy", "natural log over token label frequencies"},
            {"kurtosis", "population excess kurtosis of the observed label frequency vector"},
            {"silver", "test sentence is negated when a lowercased lexicon cue matches"}}}};
}

}  // namespace negsent::exp
