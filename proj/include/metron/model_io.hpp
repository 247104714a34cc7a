// Unified model container: a JSON envelope {format_version, family, language,
// mode, word_boundaries, label_alphabet, payload} with a nested-JSON payload
// per model family. Files are self-describing; loading dispatches on the
// family recorded in the envelope.
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "metron/crf.hpp"
#include "metron/encoding.hpp"
#include "metron/hmm.hpp"
#include "metron/neural.hpp"
#include "metron/perceptron.hpp"

namespace metron {

enum class Family : uint8_t { Perceptron, Hmm, Crf, BilstmCrf };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Perceptron: return "perceptron";
    case Family::Hmm: return "hmm";
    case Family::Crf: return "crf";
    default: return "bilstm-crf";
  }
}

inline Family parse_family(const std::string& s) {
  if (s == "perceptron") return Family::Perceptron;
  if (s == "hmm") return Family::Hmm;
  if (s == "crf") return Family::Crf;
  if (s == "bilstm-crf") return Family::BilstmCrf;
  throw std::invalid_argument("unknown model family: '" + s +
                              "' (perceptron|hmm|crf|bilstm-crf)");
}

inline constexpr int kModelFormatVersion = 1;

namespace model_io {

using nlohmann::json;

// ---- perceptron ----

inline json to_json(const perceptron::PerceptronModel& m) {
  json j;
  j["feature_set"] = features::feature_set_name(m.feature_set);
  j["feature_names"] = m.alphabet.names();
  j["weights"] = m.averaged;
  return j;
}

inline perceptron::PerceptronModel perceptron_from_json(const json& j,
                                                        std::vector<std::string> labels) {
  perceptron::PerceptronModel m;
  m.labels = std::move(labels);
  m.feature_set = features::parse_feature_set(j.at("feature_set").get<std::string>());
  m.alphabet = features::FeatureAlphabet::from_names(
      j.at("feature_names").get<std::vector<std::string>>(), /*frozen=*/true);
  m.averaged = j.at("weights").get<std::vector<std::vector<double>>>();
  if (m.averaged.size() != m.labels.size())
    throw std::runtime_error("perceptron payload: weight rows do not match label alphabet");
  return m;
}

// ---- hmm ----

inline json to_json(const hmm::HmmModel& m) {
  json j;
  j["n_sequences"] = m.n_sequences;
  j["n_events"] = m.n_events;
  json tri = json::array();
  for (const auto& [key, count] : m.trigram) tri.push_back({key[0], key[1], key[2], count});
  j["trigram"] = std::move(tri);
  json big = json::array();
  for (const auto& [key, count] : m.bigram) big.push_back({key.first, key.second, count});
  j["bigram"] = std::move(big);
  json ctx = json::array();
  for (const auto& [key, count] : m.context_pair) ctx.push_back({key.first, key.second, count});
  j["context_pair"] = std::move(ctx);
  j["context_uni"] = m.context_uni;
  j["event_uni"] = m.event_uni;
  json emi = json::array();
  for (const auto& counts : m.emission_counts) {
    json obj = json::object();
    for (const auto& [obs, c] : counts) obj[obs] = c;
    emi.push_back(std::move(obj));
  }
  j["emission_counts"] = std::move(emi);
  j["emission_total"] = m.emission_total;
  json voc = json::object();
  for (const auto& [obs, c] : m.vocab) voc[obs] = c;
  j["vocab"] = std::move(voc);
  json sfx = json::array();
  for (const auto& [key, count] : m.suffix_counts) sfx.push_back({key.first, key.second, count});
  j["suffix_counts"] = std::move(sfx);
  j["rare_total"] = m.rare_total;
  return j;
}

inline hmm::HmmModel hmm_from_json(const json& j, std::vector<std::string> labels) {
  hmm::HmmModel m;
  m.labels = std::move(labels);
  m.n_sequences = j.at("n_sequences").get<long>();
  m.n_events = j.at("n_events").get<long>();
  for (const json& e : j.at("trigram"))
    m.trigram[{e[0].get<int>(), e[1].get<int>(), e[2].get<int>()}] = e[3].get<long>();
  for (const json& e : j.at("bigram"))
    m.bigram[{e[0].get<int>(), e[1].get<int>()}] = e[2].get<long>();
  for (const json& e : j.at("context_pair"))
    m.context_pair[{e[0].get<int>(), e[1].get<int>()}] = e[2].get<long>();
  m.context_uni = j.at("context_uni").get<std::vector<long>>();
  m.event_uni = j.at("event_uni").get<std::vector<long>>();
  for (const json& obj : j.at("emission_counts")) {
    std::unordered_map<std::string, long> counts;
    for (auto it = obj.begin(); it != obj.end(); ++it) counts[it.key()] = it.value().get<long>();
    m.emission_counts.push_back(std::move(counts));
  }
  m.emission_total = j.at("emission_total").get<std::vector<long>>();
  for (auto it = j.at("vocab").begin(); it != j.at("vocab").end(); ++it)
    m.vocab[it.key()] = it.value().get<long>();
  for (const json& e : j.at("suffix_counts"))
    m.suffix_counts[{e[0].get<std::string>(), e[1].get<int>()}] = e[2].get<long>();
  m.rare_total = j.at("rare_total").get<long>();
  if (m.emission_counts.size() != m.labels.size())
    throw std::runtime_error("hmm payload: emission tables do not match label alphabet");
  hmm::finalize_model(m);
  return m;
}

// ---- crf ----

inline json to_json(const crf::CrfModel& m) {
  json j;
  j["feature_set"] = features::feature_set_name(m.feature_set);
  j["feature_names"] = m.alphabet.names();
  j["sigma2"] = m.sigma2;
  j["params"] = m.params;
  return j;
}

inline crf::CrfModel crf_from_json(const json& j, std::vector<std::string> labels) {
  crf::CrfModel m = crf::CrfModel::create(
      std::move(labels),
      features::FeatureAlphabet::from_names(j.at("feature_names").get<std::vector<std::string>>(),
                                            /*frozen=*/true),
      features::parse_feature_set(j.at("feature_set").get<std::string>()),
      j.at("sigma2").get<double>());
  m.params = j.at("params").get<std::vector<double>>();
  if (m.params.size() != m.param_count())
    throw std::runtime_error("crf payload: parameter count mismatch");
  return m;
}

// ---- bilstm-crf ----

inline json tensor_to_json(const autodiff::Tensor& t) {
  return json{{"rows", t.rows}, {"cols", t.cols}, {"v", t.v}};
}

inline autodiff::Tensor tensor_from_json(const json& j) {
  autodiff::Tensor t(j.at("rows").get<int>(), j.at("cols").get<int>());
  t.v = j.at("v").get<std::vector<double>>();
  if (t.v.size() != static_cast<size_t>(t.rows) * t.cols)
    throw std::runtime_error("tensor payload: value count mismatch");
  return t;
}

inline json lstm_to_json(const autodiff::LstmParams& p) {
  return json{{"w", tensor_to_json(p.w)},
              {"u", tensor_to_json(p.u)},
              {"b", tensor_to_json(p.b)},
              {"hidden", p.hidden}};
}

inline autodiff::LstmParams lstm_from_json(const json& j) {
  autodiff::LstmParams p;
  p.w = tensor_from_json(j.at("w"));
  p.u = tensor_from_json(j.at("u"));
  p.b = tensor_from_json(j.at("b"));
  p.hidden = j.at("hidden").get<int>();
  return p;
}

inline json to_json(const neural::BilstmCrfModel& m) {
  json j;
  j["config"] = {{"char_dim", m.config.char_dim},
                 {"char_hidden", m.config.char_hidden},
                 {"token_dim", m.config.token_dim},
                 {"token_hidden", m.config.token_hidden},
                 {"dropout", m.config.dropout},
                 {"lr", m.config.lr},
                 {"grad_clip", m.config.grad_clip},
                 {"epochs", m.config.epochs},
                 {"batch_size", m.config.batch_size},
                 {"seed", m.config.seed}};
  j["char_vocab"] = m.char_vocab;
  j["token_vocab"] = m.token_vocab;
  j["char_emb"] = tensor_to_json(m.char_emb);
  j["char_fwd"] = lstm_to_json(m.char_fwd);
  j["char_bwd"] = lstm_to_json(m.char_bwd);
  j["token_emb"] = tensor_to_json(m.token_emb);
  j["token_fwd"] = lstm_to_json(m.token_fwd);
  j["token_bwd"] = lstm_to_json(m.token_bwd);
  j["proj_w"] = tensor_to_json(m.proj_w);
  j["proj_b"] = tensor_to_json(m.proj_b);
  j["crf_trans"] = tensor_to_json(m.crf_trans);
  j["crf_bos"] = tensor_to_json(m.crf_bos);
  j["crf_eos"] = tensor_to_json(m.crf_eos);
  return j;
}

inline neural::BilstmCrfModel neural_from_json(const json& j, std::vector<std::string> labels) {
  neural::BilstmCrfModel m;
  m.labels = std::move(labels);
  const json& c = j.at("config");
  m.config.char_dim = c.at("char_dim").get<int>();
  m.config.char_hidden = c.at("char_hidden").get<int>();
  m.config.token_dim = c.at("token_dim").get<int>();
  m.config.token_hidden = c.at("token_hidden").get<int>();
  m.config.dropout = c.at("dropout").get<double>();
  m.config.lr = c.at("lr").get<double>();
  m.config.grad_clip = c.at("grad_clip").get<double>();
  m.config.epochs = c.at("epochs").get<int>();
  m.config.batch_size = c.at("batch_size").get<int>();
  m.config.seed = c.at("seed").get<uint64_t>();
  m.char_vocab = j.at("char_vocab").get<std::unordered_map<std::string, int>>();
  m.token_vocab = j.at("token_vocab").get<std::unordered_map<std::string, int>>();
  m.char_emb = tensor_from_json(j.at("char_emb"));
  m.char_fwd = lstm_from_json(j.at("char_fwd"));
  m.char_bwd = lstm_from_json(j.at("char_bwd"));
  m.token_emb = tensor_from_json(j.at("token_emb"));
  m.token_fwd = lstm_from_json(j.at("token_fwd"));
  m.token_bwd = lstm_from_json(j.at("token_bwd"));
  m.proj_w = tensor_from_json(j.at("proj_w"));
  m.proj_b = tensor_from_json(j.at("proj_b"));
  m.crf_trans = tensor_from_json(j.at("crf_trans"));
  m.crf_bos = tensor_from_json(j.at("crf_bos"));
  m.crf_eos = tensor_from_json(j.at("crf_eos"));
  return m;
}

struct Envelope {
  int format_version = kModelFormatVersion;
  Family family = Family::Hmm;
  Language language = Language::EN;
  Mode mode = Mode::S2S;
  bool word_boundaries = false;
  std::vector<std::string> label_alphabet;
  json payload;
};

inline void save_envelope(const Envelope& env, const std::string& path) {
  json j;
  j["format_version"] = env.format_version;
  j["family"] = family_name(env.family);
  j["language"] = language_name(env.language);
  j["mode"] = mode_name(env.mode);
  j["word_boundaries"] = env.word_boundaries;
  j["label_alphabet"] = env.label_alphabet;
  j["payload"] = env.payload;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("write error on model file: " + path);
}

inline Envelope load_envelope(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("model file '" + path + "' is not valid JSON: " + e.what());
  }
  Envelope env;
  env.format_version = j.at("format_version").get<int>();
  if (env.format_version != kModelFormatVersion)
    throw std::runtime_error("model file '" + path + "' has format version " +
                             std::to_string(env.format_version) + ", expected " +
                             std::to_string(kModelFormatVersion));
  env.family = parse_family(j.at("family").get<std::string>());
  env.language = parse_language(j.at("language").get<std::string>());
  env.mode = parse_mode(j.at("mode").get<std::string>());
  env.word_boundaries = j.at("word_boundaries").get<bool>();
  env.label_alphabet = j.at("label_alphabet").get<std::vector<std::string>>();
  env.payload = j.at("payload");
  return env;
}

}  // namespace model_io
}  // namespace metron
