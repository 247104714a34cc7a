// Pipeline wiring: RunConfig selects a family/encoding/feature set, and a
// TrainedTagger bundles the trained model with its prediction path.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metron/corpus.hpp"
#include "metron/cross_validation.hpp"
#include "metron/encoding.hpp"
#include "metron/model_io.hpp"

namespace metron {

struct RunConfig {
  Family family = Family::Crf;
  Mode mode = Mode::S2S;  // s2s or w2sp; word_boundaries upgrades s2s
  bool word_boundaries = false;
  features::FeatureSet feature_set = features::FeatureSet::Full64;
  bool train_all_references = false;  // train on every gold reference, not just the first
  uint64_t seed = 1;
  int folds = 10;
  int jobs = 0;

  perceptron::PerceptronConfig perceptron_cfg;
  crf::CrfConfig crf_cfg;
  neural::NeuralConfig neural_cfg;
  double neural_dev_fraction = 0.1;

  Mode effective_mode() const {
    if (word_boundaries) {
      if (mode != Mode::S2S)
        throw std::invalid_argument("word boundaries require s2s mode");
      return Mode::S2S_WB;
    }
    return mode;
  }

  void validate() const {
    (void)effective_mode();
  }
};

class TrainedTagger {
 public:
  Family family = Family::Hmm;
  Language language = Language::EN;
  Mode mode = Mode::S2S;
  bool word_boundaries = false;

  std::optional<perceptron::PerceptronModel> perceptron_model;
  std::optional<hmm::HmmModel> hmm_model;
  std::optional<crf::CrfModel> crf_model;
  std::shared_ptr<neural::BilstmCrfModel> neural_model;

  std::vector<std::string> predict_labels(const Line& line) {
    EncodedSequence seq = encode(line, mode, 0);
    switch (family) {
      case Family::Perceptron: {
        perceptron::PerceptronModel& model = *perceptron_model;
        std::vector<features::FeatureVector> feats;
        feats.reserve(seq.size());
        for (int i = 0; i < static_cast<int>(seq.size()); ++i)
          feats.push_back(features::extract(seq, i, line, model.feature_set, model.alphabet));
        return perceptron::predict_perceptron(model, feats);
      }
      case Family::Hmm:
        return hmm::viterbi(*hmm_model, seq.observations);
      case Family::Crf: {
        crf::CrfModel& model = *crf_model;
        features::FeaturizedSequence item =
            features::featurize(seq, line, model.feature_set, model.alphabet);
        return crf::crf_viterbi(model, item);
      }
      default:
        return neural::neural_predict(*neural_model, seq.observations);
    }
  }

  StressSeq predict_stress(const Line& line) {
    return decode_to_stress(predict_labels(line), mode);
  }

  std::vector<std::string> label_alphabet() const {
    switch (family) {
      case Family::Perceptron: return perceptron_model->labels;
      case Family::Hmm: return hmm_model->labels;
      case Family::Crf: return crf_model->labels;
      default: return neural_model->labels;
    }
  }
};

namespace detail {

inline std::vector<EncodedSequence> encode_training_set(const std::vector<Line>& lines, Mode mode,
                                                        bool all_references) {
  std::vector<EncodedSequence> out;
  out.reserve(lines.size());
  for (const Line& line : lines) {
    size_t refs = all_references ? line.gold.size() : 1;
    for (size_t r = 0; r < refs; ++r) out.push_back(encode(line, mode, r));
  }
  return out;
}

// (sequence, owning line) pairs so the feature templates can reach POS and
// word-level annotations.
inline std::vector<features::FeaturizedSequence> featurize_training_set(
    const std::vector<Line>& lines, Mode mode, bool all_references, features::FeatureSet set,
    features::FeatureAlphabet& alphabet) {
  std::vector<features::FeaturizedSequence> out;
  out.reserve(lines.size());
  for (const Line& line : lines) {
    size_t refs = all_references ? line.gold.size() : 1;
    for (size_t r = 0; r < refs; ++r)
      out.push_back(features::featurize(encode(line, mode, r), line, set, alphabet));
  }
  return out;
}

inline std::vector<std::string> collect_labels(const std::vector<features::FeaturizedSequence>& data) {
  std::set<std::string> labels;
  for (const auto& item : data)
    for (const std::string& l : item.seq.labels) labels.insert(l);
  return {labels.begin(), labels.end()};
}

}  // namespace detail

inline TrainedTagger train_tagger(const std::vector<Line>& train, Language language,
                                  const RunConfig& config) {
  if (train.empty()) throw std::invalid_argument("train_tagger: no training lines");
  config.validate();
  Mode mode = config.effective_mode();

  TrainedTagger tagger;
  tagger.family = config.family;
  tagger.language = language;
  tagger.mode = mode;
  tagger.word_boundaries = config.word_boundaries;

  switch (config.family) {
    case Family::Perceptron: {
      features::FeatureAlphabet alphabet;
      auto data = detail::featurize_training_set(train, mode, config.train_all_references,
                                                 config.feature_set, alphabet);
      perceptron::PerceptronConfig pc = config.perceptron_cfg;
      pc.seed = config.seed;
      tagger.perceptron_model =
          perceptron::train_perceptron(data, std::move(alphabet), config.feature_set, pc);
      break;
    }
    case Family::Hmm: {
      auto data = detail::encode_training_set(train, mode, config.train_all_references);
      tagger.hmm_model = hmm::train_hmm(data);
      break;
    }
    case Family::Crf: {
      features::FeatureAlphabet alphabet;
      auto data = detail::featurize_training_set(train, mode, config.train_all_references,
                                                 config.feature_set, alphabet);
      crf::CrfConfig cc = config.crf_cfg;
      cc.seed = config.seed;
      tagger.crf_model = crf::train_crf(data, detail::collect_labels(data), std::move(alphabet),
                                        config.feature_set, cc);
      break;
    }
    default: {
      auto data = detail::encode_training_set(train, mode, config.train_all_references);
      // carve a deterministic dev slice off the shuffled training set
      std::vector<size_t> order(data.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::mt19937_64 rng(config.seed ^ 0xDEADBEEFULL);
      std::shuffle(order.begin(), order.end(), rng);
      size_t dev_count = static_cast<size_t>(static_cast<double>(data.size()) *
                                             config.neural_dev_fraction);
      std::vector<EncodedSequence> dev, fit;
      for (size_t i = 0; i < order.size(); ++i)
        (i < dev_count ? dev : fit).push_back(data[order[i]]);
      if (fit.empty()) std::swap(fit, dev);
      neural::NeuralConfig nc = config.neural_cfg;
      nc.seed = config.seed;
      tagger.neural_model = std::make_shared<neural::BilstmCrfModel>(
          neural::train_neural(fit, dev, nc));
      break;
    }
  }
  return tagger;
}

// The spec-shaped cross-validation entry: train/evaluate the configured
// family over seeded folds.
inline eval::EvalReport cross_validate(const Corpus& corpus, const RunConfig& config) {
  eval::Trainer trainer = [&](const std::vector<Line>& train, uint64_t fold_seed) {
    RunConfig fold_config = config;
    fold_config.seed = fold_seed;
    auto tagger = std::make_shared<TrainedTagger>(
        train_tagger(train, corpus.language, fold_config));
    return eval::Predictor(
        [tagger](const Line& line) { return tagger->predict_stress(line); });
  };
  eval::CvOptions options;
  options.folds = config.folds;
  options.seed = config.seed;
  options.jobs = config.jobs;
  return eval::cross_validate(corpus, trainer, options);
}

inline void save_tagger(const TrainedTagger& tagger, const std::string& path) {
  model_io::Envelope env;
  env.family = tagger.family;
  env.language = tagger.language;
  env.mode = tagger.mode;
  env.word_boundaries = tagger.word_boundaries;
  env.label_alphabet = tagger.label_alphabet();
  switch (tagger.family) {
    case Family::Perceptron: env.payload = model_io::to_json(*tagger.perceptron_model); break;
    case Family::Hmm: env.payload = model_io::to_json(*tagger.hmm_model); break;
    case Family::Crf: env.payload = model_io::to_json(*tagger.crf_model); break;
    default: env.payload = model_io::to_json(*tagger.neural_model); break;
  }
  model_io::save_envelope(env, path);
}

inline TrainedTagger load_tagger(const std::string& path) {
  model_io::Envelope env = model_io::load_envelope(path);
  TrainedTagger tagger;
  tagger.family = env.family;
  tagger.language = env.language;
  tagger.mode = env.mode;
  tagger.word_boundaries = env.word_boundaries;
  switch (env.family) {
    case Family::Perceptron:
      tagger.perceptron_model = model_io::perceptron_from_json(env.payload, env.label_alphabet);
      break;
    case Family::Hmm:
      tagger.hmm_model = model_io::hmm_from_json(env.payload, env.label_alphabet);
      break;
    case Family::Crf:
      tagger.crf_model = model_io::crf_from_json(env.payload, env.label_alphabet);
      break;
    default:
      tagger.neural_model = std::make_shared<neural::BilstmCrfModel>(
          model_io::neural_from_json(env.payload, env.label_alphabet));
      break;
  }
  return tagger;
}

}  // namespace metron
