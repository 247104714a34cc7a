// metron: trainable poetic-scansion engine.
// Subcommands: train, predict, evaluate, cv, syllabify, stats, ttest,
// dump-activations, generate.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metron/corpus_io.hpp"
#include "metron/cross_validation.hpp"
#include "metron/eval.hpp"
#include "metron/synthetic.hpp"
#include "metron/tagger.hpp"

namespace {

using namespace metron;
using nlohmann::json;

uint64_t default_seed() {
  if (const char* env = std::getenv("METRON_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("METRON_SEED is not an integer: '" + std::string(env) + "'");
    }
  }
  return 1;
}

struct CommonModelFlags {
  std::string family = "crf";
  std::string mode = "s2s";
  bool word_boundaries = false;
  std::string feature_set = "full64";
  bool all_references = false;
  uint64_t seed = 0;
  bool seed_given = false;

  // hyperparameters (0 / negative means "use the family default")
  int epochs = -1;
  double sigma2 = -1.0;
  double lr = -1.0;
  double dropout = -1.0;
  double grad_clip = -1.0;
  int char_dim = -1, char_hidden = -1, token_dim = -1, token_hidden = -1, batch_size = -1;
  std::string pretrained;

  void add_to(CLI::App* cmd, bool with_seed = true) {
    cmd->add_option("--model", family, "model family: perceptron|hmm|crf|bilstm-crf");
    cmd->add_option("--mode", mode, "input encoding: s2s|w2sp");
    cmd->add_flag("--word-boundaries", word_boundaries, "insert word boundary markers (s2s only)");
    cmd->add_option("--features", feature_set, "feature set for perceptron/crf: basic10|full64");
    cmd->add_flag("--all-references", all_references, "train on all gold references, not just the first");
    if (with_seed)
      cmd->add_option("--seed", seed, "random seed (fallback: METRON_SEED, then 1)")
          ->each([this](const std::string&) { seed_given = true; });
    cmd->add_option("--epochs", epochs, "training epochs");
    cmd->add_option("--sigma2", sigma2, "CRF L2 regularizer sigma^2");
    cmd->add_option("--lr", lr, "learning rate (crf / bilstm-crf)");
    cmd->add_option("--dropout", dropout, "bilstm-crf dropout rate");
    cmd->add_option("--grad-clip", grad_clip, "bilstm-crf gradient clip norm");
    cmd->add_option("--char-dim", char_dim, "bilstm-crf character embedding dim");
    cmd->add_option("--char-hidden", char_hidden, "bilstm-crf character LSTM hidden size");
    cmd->add_option("--token-dim", token_dim, "bilstm-crf token embedding dim");
    cmd->add_option("--token-hidden", token_hidden, "bilstm-crf token LSTM hidden size");
    cmd->add_option("--batch-size", batch_size, "bilstm-crf batch size");
    cmd->add_option("--pretrained-embeddings", pretrained,
                    "pretrained token embedding file (w2sp runs)");
  }

  RunConfig to_config() const {
    RunConfig cfg;
    cfg.family = parse_family(family);
    cfg.mode = parse_mode(mode);
    if (cfg.mode == Mode::S2S_WB)
      throw std::invalid_argument("pass --mode s2s --word-boundaries instead of s2s+wb");
    cfg.word_boundaries = word_boundaries;
    cfg.feature_set = features::parse_feature_set(feature_set);
    cfg.train_all_references = all_references;
    cfg.seed = seed_given ? seed : default_seed();
    cfg.validate();

    if (cfg.family == Family::BilstmCrf && feature_set != "full64")
      std::cerr << "warning: --features is ignored for bilstm-crf\n";

    if (epochs > 0) {
      cfg.perceptron_cfg.epochs = epochs;
      cfg.crf_cfg.epochs = epochs;
      cfg.neural_cfg.epochs = epochs;
    }
    if (sigma2 > 0) cfg.crf_cfg.sigma2 = sigma2;
    if (lr > 0) {
      cfg.crf_cfg.lr = lr;
      cfg.neural_cfg.lr = lr;
    }
    if (dropout >= 0) cfg.neural_cfg.dropout = dropout;
    if (grad_clip > 0) cfg.neural_cfg.grad_clip = grad_clip;
    if (char_dim > 0) cfg.neural_cfg.char_dim = char_dim;
    if (char_hidden > 0) cfg.neural_cfg.char_hidden = char_hidden;
    if (token_dim > 0) cfg.neural_cfg.token_dim = token_dim;
    if (token_hidden > 0) cfg.neural_cfg.token_hidden = token_hidden;
    if (batch_size > 0) cfg.neural_cfg.batch_size = batch_size;
    if (!pretrained.empty()) cfg.neural_cfg.pretrained_embeddings = pretrained;
    return cfg;
  }
};

json report_to_json(const eval::EvalReport& r) {
  json folds = json::array();
  for (const auto& f : r.per_fold)
    folds.push_back({{"fold", f.fold}, {"per_syllable", f.per_syllable}, {"per_line", f.per_line}});
  return json{{"per_syllable", r.per_syllable},
              {"per_line", r.per_line},
              {"total_syllables", r.total_syllables},
              {"total_lines", r.total_lines},
              {"per_fold", folds}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write error on '" + path + "'");
}

// "family[:token]*" where tokens are basic10|full64|wb|w2sp, e.g.
// "crf:basic10" or "bilstm-crf:wb".
RunConfig parse_compare_spec(const std::string& spec, const RunConfig& base) {
  RunConfig cfg = base;
  cfg.word_boundaries = false;
  cfg.mode = Mode::S2S;
  std::istringstream ss(spec);
  std::string tok;
  bool first = true;
  while (std::getline(ss, tok, ':')) {
    if (first) {
      cfg.family = parse_family(tok);
      first = false;
    } else if (tok == "basic10" || tok == "full64") {
      cfg.feature_set = features::parse_feature_set(tok);
    } else if (tok == "wb") {
      cfg.word_boundaries = true;
    } else if (tok == "w2sp") {
      cfg.mode = Mode::W2SP;
    } else {
      throw std::invalid_argument("bad --compare token '" + tok + "' in spec '" + spec + "'");
    }
  }
  if (first) throw std::invalid_argument("empty --compare spec");
  return cfg;
}

double training_objective(TrainedTagger& tagger, const std::vector<Line>& lines,
                          const RunConfig& cfg) {
  switch (tagger.family) {
    case Family::Crf: {
      crf::CrfModel& m = *tagger.crf_model;
      std::vector<features::FeaturizedSequence> data;
      for (const Line& line : lines)
        data.push_back(features::featurize(encode(line, tagger.mode, 0), line, m.feature_set,
                                           m.alphabet));
      return crf::crf_log_likelihood_and_gradient(m, data).first;
    }
    case Family::BilstmCrf: {
      std::vector<EncodedSequence> data;
      for (const Line& line : lines) data.push_back(encode(line, tagger.mode, 0));
      return -neural::neural_loss_and_gradients(*tagger.neural_model, data, false, cfg.seed);
    }
    case Family::Hmm: {
      double ll = 0.0;
      for (const Line& line : lines) {
        EncodedSequence seq = encode(line, tagger.mode, 0);
        std::vector<int> ids;
        for (const std::string& l : seq.labels) ids.push_back(tagger.hmm_model->label_id(l));
        ll += hmm::sequence_log_prob(*tagger.hmm_model, seq.observations, ids);
      }
      return ll;
    }
    default: {  // perceptron: training-set position accuracy
      long correct = 0, total = 0;
      for (const Line& line : lines) {
        EncodedSequence seq = encode(line, tagger.mode, 0);
        std::vector<std::string> pred = tagger.predict_labels(line);
        for (size_t i = 0; i < pred.size() && i < seq.labels.size(); ++i) {
          ++total;
          if (pred[i] == seq.labels[i]) ++correct;
        }
      }
      return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    }
  }
}

int cmd_train(const CommonModelFlags& flags, const std::string& corpus_path,
              const std::string& out_path) {
  RunConfig cfg = flags.to_config();
  Corpus corpus = load_corpus(corpus_path);
  auto start = std::chrono::steady_clock::now();
  TrainedTagger tagger = train_tagger(corpus.lines, corpus.language, cfg);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_tagger(tagger, out_path);

  double objective = training_objective(tagger, corpus.lines, cfg);
  std::cout << "trained " << family_name(cfg.family) << " (" << mode_name(tagger.mode)
            << (cfg.family == Family::Perceptron || cfg.family == Family::Crf
                    ? std::string(", ") + features::feature_set_name(cfg.feature_set)
                    : "")
            << ") on " << corpus.lines.size() << " lines\n";
  std::cout << "labels: " << tagger.label_alphabet().size() << "  seed: " << cfg.seed << "\n";
  std::cout << "objective: " << objective << "  wall: " << secs << "s\n";
  std::cout << "model written to " << out_path << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& corpus_path,
                const std::string& out_path) {
  TrainedTagger tagger = load_tagger(model_path);
  Corpus corpus = load_corpus(corpus_path);
  if (corpus.language != tagger.language)
    std::cerr << "warning: model language is " << language_name(tagger.language)
              << " but corpus is " << language_name(corpus.language) << "; proceeding\n";
  std::ostringstream out;
  for (const Line& line : corpus.lines) {
    json j = detail::line_to_json(line);
    j["pred"] = stress_string(tagger.predict_stress(line));
    out << j.dump() << '\n';
  }
  write_text(out_path, out.str());
  std::cout << "wrote " << corpus.lines.size() << " predictions to " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& corpus_path,
                 const std::string& report_path) {
  TrainedTagger tagger = load_tagger(model_path);
  Corpus corpus = load_corpus(corpus_path);
  std::vector<eval::LineScore> scores;
  for (const Line& line : corpus.lines)
    scores.push_back(eval::score_line(tagger.predict_stress(line), line.gold));
  eval::EvalReport report = eval::aggregate(scores);
  std::cout << "per-syllable: " << report.per_syllable << "  per-line: " << report.per_line
            << "  (" << report.total_lines << " lines)\n";
  if (!report_path.empty()) write_text(report_path, report_to_json(report).dump(2) + "\n");
  return 0;
}

int cmd_cv(const CommonModelFlags& flags, const std::string& corpus_path, int folds, int jobs,
           const std::string& report_path, const std::string& fold_csv_path,
           const std::string& compare_spec) {
  RunConfig cfg = flags.to_config();
  cfg.folds = folds;
  cfg.jobs = jobs;
  Corpus corpus = load_corpus(corpus_path);

  eval::EvalReport report = cross_validate(corpus, cfg);
  std::cout << family_name(cfg.family) << " " << mode_name(cfg.effective_mode()) << ": per-syllable "
            << report.per_syllable << ", per-line " << report.per_line << " over " << cfg.folds
            << " folds\n";
  if (!report_path.empty()) write_text(report_path, report_to_json(report).dump(2) + "\n");
  if (!fold_csv_path.empty()) {
    std::string csv = "fold,per_syllable,per_line\n";
    for (const auto& f : report.per_fold)
      csv += std::to_string(f.fold) + "," + std::to_string(f.per_syllable) + "," +
             std::to_string(f.per_line) + "\n";
    write_text(fold_csv_path, csv);
  }

  if (!compare_spec.empty()) {
    RunConfig other = parse_compare_spec(compare_spec, cfg);
    eval::EvalReport other_report = cross_validate(corpus, other);
    std::cout << family_name(other.family) << " " << mode_name(other.effective_mode())
              << ": per-syllable " << other_report.per_syllable << ", per-line "
              << other_report.per_line << "\n";
    std::vector<double> a, b;
    for (const auto& f : report.per_fold) a.push_back(f.per_syllable);
    for (const auto& f : other_report.per_fold) b.push_back(f.per_syllable);
    eval::WelchResult w = eval::welch_t_test(a, b);
    std::cout << "welch t-test on per-fold per-syllable: t=" << w.t << " df=" << w.df
              << " p=" << w.p << "\n";
  }
  return 0;
}

int cmd_syllabify(const std::string& lang) {
  Language language = parse_language(lang);
  std::string word;
  while (std::getline(std::cin, word)) {
    if (word.empty()) continue;
    std::vector<std::string> sylls = phonology::syllabify(word, language);
    for (size_t i = 0; i < sylls.size(); ++i) std::cout << (i ? "·" : "") << sylls[i];
    std::cout << '\n';
  }
  return 0;
}

int cmd_stats(const std::string& corpus_path, const std::string& out_path) {
  Corpus corpus = load_corpus(corpus_path);
  std::string csv = eval::histogram_csv(eval::syllable_length_stats(corpus));
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    write_text(out_path, csv);
  }
  return 0;
}

std::vector<double> parse_sample(const std::string& text) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

int cmd_ttest(const std::string& a_text, const std::string& b_text) {
  eval::WelchResult w = eval::welch_t_test(parse_sample(a_text), parse_sample(b_text));
  std::cout << "t=" << w.t << " df=" << w.df << " p=" << w.p << "\n";
  return 0;
}

int cmd_dump_activations(const std::string& model_path, const std::string& corpus_path,
                         const std::string& line_id, const std::string& out_path) {
  TrainedTagger tagger = load_tagger(model_path);
  if (tagger.family != Family::BilstmCrf)
    throw std::invalid_argument("dump-activations requires a bilstm-crf model file");
  Corpus corpus = load_corpus(corpus_path);
  const Line* line = &corpus.lines.front();
  if (!line_id.empty()) {
    line = nullptr;
    for (const Line& l : corpus.lines)
      if (l.id == line_id) line = &l;
    if (!line) throw std::invalid_argument("no line with id '" + line_id + "' in corpus");
  }
  EncodedSequence seq = encode(*line, tagger.mode, 0);
  std::ostringstream out;
  neural::dump_activations(*tagger.neural_model, seq.observations, out);
  write_text(out_path, out.str());
  std::cout << "wrote activations for line '" << line->id << "' (" << seq.size()
            << " positions) to " << out_path << "\n";
  return 0;
}

int cmd_generate(const std::string& kind, const std::string& foot, int feet, int lines,
                 int words_per_line, double noise, uint64_t seed, const std::string& out_path) {
  Corpus corpus;
  if (kind == "meter") {
    corpus = generate_synthetic(MeterSpec{parse_foot(foot), feet}, lines, noise, seed);
  } else if (kind == "positional") {
    corpus = generate_positional(lines, words_per_line, noise, seed);
  } else {
    throw std::invalid_argument("unknown --kind '" + kind + "' (meter|positional)");
  }
  save_corpus(corpus, out_path);
  std::cout << "wrote " << corpus.lines.size() << " lines to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metron: trainable poetic scansion"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train a tagger and write a model file");
  CommonModelFlags train_flags;
  std::string corpus_path, out_path;
  train_flags.add_to(train);
  train->add_option("--corpus", corpus_path, "training corpus (JSONL)")->required();
  train->add_option("--out", out_path, "output model file")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "annotate a corpus with predicted stress");
  std::string p_model, p_corpus, p_out;
  predict->add_option("--model-file", p_model, "trained model file")->required();
  predict->add_option("--corpus", p_corpus, "input corpus (JSONL)")->required();
  predict->add_option("--out", p_out, "output JSONL with a \"pred\" field")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score a model file against a gold corpus");
  std::string e_model, e_corpus, e_report;
  evaluate->add_option("--model-file", e_model)->required();
  evaluate->add_option("--corpus", e_corpus)->required();
  evaluate->add_option("--report", e_report, "write the EvalReport as JSON");

  // cv
  auto* cv = app.add_subcommand("cv", "k-fold cross-validation");
  CommonModelFlags cv_flags;
  std::string cv_corpus, cv_report, cv_fold_csv, cv_compare;
  int cv_folds = 10, cv_jobs = 0;
  cv_flags.add_to(cv);
  cv->add_option("--corpus", cv_corpus)->required();
  cv->add_option("--folds", cv_folds, "number of folds (default 10)");
  cv->add_option("--jobs", cv_jobs, "parallel fold workers (0 = hardware)");
  cv->add_option("--report", cv_report, "write the EvalReport as JSON");
  cv->add_option("--per-fold-csv", cv_fold_csv, "write per-fold accuracies as CSV");
  cv->add_option("--compare", cv_compare,
                 "second config 'family[:basic10|:full64][:wb][:w2sp]'; adds a Welch t-test");

  // syllabify
  auto* syllabify = app.add_subcommand("syllabify", "syllabify words from stdin");
  std::string s_lang = "en";
  syllabify->add_option("--lang", s_lang, "en|es");

  // stats
  auto* stats = app.add_subcommand("stats", "syllables-per-word histogram as CSV");
  std::string st_corpus, st_out;
  stats->add_option("--corpus", st_corpus)->required();
  stats->add_option("--out", st_out, "output CSV (default stdout)");

  // ttest
  auto* ttest = app.add_subcommand("ttest", "Welch's two-sample t-test");
  std::string t_a, t_b;
  ttest->add_option("--a", t_a, "comma-separated sample")->required();
  ttest->add_option("--b", t_b, "comma-separated sample")->required();

  // dump-activations
  auto* dump = app.add_subcommand("dump-activations", "pre-CRF score lattice as CSV");
  std::string d_model, d_corpus, d_line, d_out;
  dump->add_option("--model-file", d_model)->required();
  dump->add_option("--corpus", d_corpus)->required();
  dump->add_option("--line-id", d_line, "line to dump (default: first)");
  dump->add_option("--out", d_out, "output CSV")->required();

  // generate
  auto* generate = app.add_subcommand("generate", "write a synthetic corpus");
  std::string g_kind = "meter", g_foot = "iamb", g_out;
  int g_feet = 5, g_lines = 100, g_words = 4;
  double g_noise = 0.0;
  uint64_t g_seed = 0;
  bool g_seed_given = false;
  generate->add_option("--kind", g_kind, "meter|positional");
  generate->add_option("--foot", g_foot, "iamb|trochee|dactyl|anapest");
  generate->add_option("--feet", g_feet, "feet per line");
  generate->add_option("--lines", g_lines, "number of lines")->required();
  generate->add_option("--words-per-line", g_words, "words per line (positional kind)");
  generate->add_option("--noise", g_noise, "per-line label-flip probability");
  generate->add_option("--seed", g_seed)->each([&](const std::string&) { g_seed_given = true; });
  generate->add_option("--out", g_out)->required();

  try {
    app.parse(argc, argv);
    if (train->parsed()) return cmd_train(train_flags, corpus_path, out_path);
    if (predict->parsed()) return cmd_predict(p_model, p_corpus, p_out);
    if (evaluate->parsed()) return cmd_evaluate(e_model, e_corpus, e_report);
    if (cv->parsed()) return cmd_cv(cv_flags, cv_corpus, cv_folds, cv_jobs, cv_report, cv_fold_csv, cv_compare);
    if (syllabify->parsed()) return cmd_syllabify(s_lang);
    if (stats->parsed()) return cmd_stats(st_corpus, st_out);
    if (ttest->parsed()) return cmd_ttest(t_a, t_b);
    if (dump->parsed()) return cmd_dump_activations(d_model, d_corpus, d_line, d_out);
    if (generate->parsed())
      return cmd_generate(g_kind, g_foot, g_feet, g_lines, g_words, g_noise,
                          g_seed_given ? g_seed : default_seed(), g_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "ERROR: " << e.what() << "\n";
    return 1;
  }
}
