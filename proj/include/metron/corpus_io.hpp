// Normalized JSONL corpus reader/writer. One Line per record:
//   {"id": str, "lang": "en"|"es",
//    "words": [{"surface": str, "syllables": [str], "lex_stress": str|null, "pos": str|null}],
//    "gold": [str]}
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "metron/corpus.hpp"
#include "metron/phonology.hpp"

namespace metron {

namespace detail {

inline Line line_from_json(const nlohmann::json& j) {
  Line line;
  line.id = j.at("id").get<std::string>();
  line.language = parse_language(j.at("lang").get<std::string>());
  for (const nlohmann::json& jw : j.at("words")) {
    Word w;
    w.surface = jw.at("surface").get<std::string>();
    for (const nlohmann::json& js : jw.at("syllables")) w.syllables.push_back(js.get<std::string>());
    if (jw.contains("lex_stress") && !jw.at("lex_stress").is_null())
      w.lexical_stress = parse_stress_string(jw.at("lex_stress").get<std::string>());
    if (jw.contains("pos") && !jw.at("pos").is_null())
      w.pos = jw.at("pos").get<std::string>();
    line.words.push_back(std::move(w));
  }
  for (const nlohmann::json& jg : j.at("gold"))
    line.gold.push_back(parse_stress_string(jg.get<std::string>()));
  return line;
}

inline nlohmann::json line_to_json(const Line& line) {
  nlohmann::json j;
  j["id"] = line.id;
  j["lang"] = language_name(line.language);
  nlohmann::json words = nlohmann::json::array();
  for (const Word& w : line.words) {
    nlohmann::json jw;
    jw["surface"] = w.surface;
    jw["syllables"] = w.syllables;
    jw["lex_stress"] = w.lexical_stress ? nlohmann::json(stress_string(*w.lexical_stress))
                                        : nlohmann::json(nullptr);
    jw["pos"] = w.pos ? nlohmann::json(*w.pos) : nlohmann::json(nullptr);
    words.push_back(std::move(jw));
  }
  j["words"] = std::move(words);
  nlohmann::json gold = nlohmann::json::array();
  for (const StressSeq& ref : line.gold) gold.push_back(stress_string(ref));
  j["gold"] = std::move(gold);
  return j;
}

}  // namespace detail

inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  Corpus corpus;
  corpus.name = path;
  std::string record;
  int lineno = 0;
  while (std::getline(in, record)) {
    ++lineno;
    if (!record.empty() && record.back() == '\r') record.pop_back();
    if (record.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(record);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": JSON parse error: " + e.what());
    }
    Line line;
    try {
      line = detail::line_from_json(j);
      phonology::finalize_line(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (corpus.lines.empty()) corpus.language = line.language;
    corpus.lines.push_back(std::move(line));
  }
  if (corpus.lines.empty()) throw std::runtime_error("empty corpus file: " + path);
  check_corpus(corpus);
  return corpus;
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const Line& line : corpus.lines) {
    out << detail::line_to_json(line).dump() << '\n';
    if (!out) throw std::runtime_error("write error on '" + path + "'");
  }
  out.flush();
  if (!out) throw std::runtime_error("write error on '" + path + "'");
}

inline bool corpora_equal(const Corpus& a, const Corpus& b) {
  if (a.language != b.language || a.lines.size() != b.lines.size()) return false;
  for (size_t i = 0; i < a.lines.size(); ++i) {
    const Line& x = a.lines[i];
    const Line& y = b.lines[i];
    if (x.id != y.id || x.language != y.language || x.gold != y.gold ||
        x.words.size() != y.words.size())
      return false;
    for (size_t w = 0; w < x.words.size(); ++w) {
      const Word& u = x.words[w];
      const Word& v = y.words[w];
      if (u.surface != v.surface || u.syllables != v.syllables ||
          u.lexical_stress != v.lexical_stress || u.pos != v.pos)
        return false;
    }
  }
  return true;
}

}  // namespace metron
