// Feature templates for the feature-based taggers: a fixed registry of 10
// basic templates plus 54 extended ones covering context windows, lexical
// stress, POS, character n-grams and positional information.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "metron/encoding.hpp"
#include "metron/utf8.hpp"

namespace metron::features {

inline constexpr uint32_t kUnkFeature = 0;

// String-to-id map. Grows while unfrozen; a frozen alphabet maps unseen
// strings to the reserved UNK id.
class FeatureAlphabet {
 public:
  FeatureAlphabet() {
    names_.push_back("<UNK>");
    ids_.emplace("<UNK>", kUnkFeature);
  }

  uint32_t lookup(const std::string& s) {
    auto it = ids_.find(s);
    if (it != ids_.end()) return it->second;
    if (frozen_) return kUnkFeature;
    uint32_t id = static_cast<uint32_t>(names_.size());
    ids_.emplace(s, id);
    names_.push_back(s);
    return id;
  }

  std::optional<uint32_t> find(const std::string& s) const {
    auto it = ids_.find(s);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  uint32_t lookup_or_unk(const std::string& s) const {
    auto it = ids_.find(s);
    return it == ids_.end() ? kUnkFeature : it->second;
  }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  size_t size() const { return names_.size(); }
  const std::string& name(uint32_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }

  // Rebuild (model deserialization).
  static FeatureAlphabet from_names(const std::vector<std::string>& names, bool frozen) {
    FeatureAlphabet a;
    a.names_ = names;
    a.ids_.clear();
    for (uint32_t i = 0; i < names.size(); ++i) a.ids_.emplace(names[i], i);
    a.frozen_ = frozen;
    return a;
  }

 private:
  std::unordered_map<std::string, uint32_t> ids_;
  std::vector<std::string> names_;
  bool frozen_ = false;
};

// Sorted ids of the binary features active at one position.
struct FeatureVector {
  std::vector<uint32_t> indices;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

enum class FeatureSet : uint8_t { Basic10, Full64 };

inline const char* feature_set_name(FeatureSet f) {
  return f == FeatureSet::Basic10 ? "basic10" : "full64";
}

inline FeatureSet parse_feature_set(const std::string& s) {
  if (s == "basic10") return FeatureSet::Basic10;
  if (s == "full64") return FeatureSet::Full64;
  throw std::invalid_argument("unknown feature set: '" + s + "'");
}

namespace detail {

inline constexpr const char* kBos = "<BOS>";
inline constexpr const char* kEos = "<EOS>";

struct Ctx {
  const EncodedSequence* seq;
  const Line* line;  // null when only the basic templates run
  int pos;

  int n() const { return static_cast<int>(seq->size()); }

  std::string obs(int rel) const {
    int i = pos + rel;
    if (i < 0) return kBos;
    if (i >= n()) return kEos;
    return seq->observations[i];
  }

  // Lexical stress at a sequence position: padding symbols beyond the line,
  // nothing when the stress is unknown.
  std::optional<std::string> ls(int rel) const {
    int i = pos + rel;
    if (i < 0) return std::string(kBos);
    if (i >= n()) return std::string(kEos);
    char c = seq->lex[i];
    if (c == 0) return std::nullopt;
    return std::string(1, c);
  }

  int word_index() const { return seq->word_of[pos]; }

  std::optional<std::string> word(int rel) const {
    if (rel == 0) return seq->word_surface[pos];
    int w = word_index();
    if (w < 0 || line == nullptr) return std::nullopt;
    int t = w + rel;
    if (t < 0) return std::string(kBos);
    if (t >= static_cast<int>(line->words.size())) return std::string(kEos);
    return line->words[t].surface;
  }

  std::optional<std::string> word_stress(int rel) const {
    int w = word_index();
    if (w < 0 || line == nullptr) return std::nullopt;
    int t = w + rel;
    if (t < 0) return std::string(kBos);
    if (t >= static_cast<int>(line->words.size())) return std::string(kEos);
    const Word& word = line->words[t];
    if (!word.lexical_stress) return std::nullopt;
    return stress_string(*word.lexical_stress);
  }

  std::optional<std::string> pos_tag(int rel) const {
    int w = word_index();
    if (w < 0 || line == nullptr) return std::nullopt;
    int t = w + rel;
    if (t < 0 || t >= static_cast<int>(line->words.size())) return std::nullopt;
    if (!line->words[t].pos) return std::nullopt;
    return *line->words[t].pos;
  }

  std::string piw_value() const {
    switch (seq->piw[pos]) {
      case PositionInWord::Only: return "only";
      case PositionInWord::Initial: return "initial";
      case PositionInWord::Medial: return "medial";
      case PositionInWord::Final: return "final";
      default: return "wb";
    }
  }

  static std::string bucket(int v) { return v >= 5 ? "5+" : std::to_string(v); }

  std::string wlen_bucket() const { return bucket(seq->word_sylls[pos]); }
};

using Emitter = std::function<std::optional<std::string>(const Ctx&)>;

struct TemplateDef {
  std::string name;
  Emitter emit;
};

inline std::optional<std::string> join(const std::optional<std::string>& a,
                                       const std::optional<std::string>& b) {
  if (!a || !b) return std::nullopt;
  return *a + "|" + *b;
}

inline const std::vector<TemplateDef>& registry() {
  static const std::vector<TemplateDef> defs = [] {
    std::vector<TemplateDef> r;
    auto add = [&r](std::string name, Emitter e) { r.push_back({std::move(name), std::move(e)}); };

    // -- the 10 basic templates --
    add("b01.o0", [](const Ctx& c) { return c.obs(0); });
    add("b02.o-1", [](const Ctx& c) { return c.obs(-1); });
    add("b03.o+1", [](const Ctx& c) { return c.obs(+1); });
    add("b04.o-2", [](const Ctx& c) { return c.obs(-2); });
    add("b05.o+2", [](const Ctx& c) { return c.obs(+2); });
    add("b06.w0", [](const Ctx& c) { return c.seq->word_surface[c.pos]; });
    add("b07.piw", [](const Ctx& c) { return c.piw_value(); });
    add("b08.wlen", [](const Ctx& c) { return c.wlen_bucket(); });
    add("b09.osfx3", [](const Ctx& c) { return utf8::suffix(c.obs(0), 3); });
    add("b10.opfx3", [](const Ctx& c) { return utf8::prefix(c.obs(0), 3); });

    // -- 54 extended templates --
    // observation conjunctions over the +-2 window
    const std::array<std::pair<int, int>, 10> pairs = {{{-2, -1},
                                                        {-2, 0},
                                                        {-2, +1},
                                                        {-2, +2},
                                                        {-1, 0},
                                                        {-1, +1},
                                                        {-1, +2},
                                                        {0, +1},
                                                        {0, +2},
                                                        {+1, +2}}};
    for (auto [i, j] : pairs) {
      std::string name = "x.conj.o" + std::string(i > 0 ? "+" : "") + std::to_string(i) + "|o" +
                         (j > 0 ? "+" : "") + std::to_string(j);
      add(name, [i = i, j = j](const Ctx& c) { return c.obs(i) + "|" + c.obs(j); });
    }
    add("x.tri.o-2|o-1|o0",
        [](const Ctx& c) { return c.obs(-2) + "|" + c.obs(-1) + "|" + c.obs(0); });
    add("x.tri.o-1|o0|o+1",
        [](const Ctx& c) { return c.obs(-1) + "|" + c.obs(0) + "|" + c.obs(+1); });
    add("x.tri.o0|o+1|o+2",
        [](const Ctx& c) { return c.obs(0) + "|" + c.obs(+1) + "|" + c.obs(+2); });

    // lexical stress window and conjunctions
    for (int rel : {-2, -1, 0, +1, +2}) {
      std::string name = "x.ls" + std::string(rel > 0 ? "+" : "") + std::to_string(rel);
      add(name, [rel](const Ctx& c) { return c.ls(rel); });
    }
    add("x.conj.ls-1|ls0", [](const Ctx& c) { return join(c.ls(-1), c.ls(0)); });
    add("x.conj.ls0|ls+1", [](const Ctx& c) { return join(c.ls(0), c.ls(+1)); });

    // word-level context
    for (int rel : {-2, -1, +1, +2}) {
      std::string name = "x.w" + std::string(rel > 0 ? "+" : "") + std::to_string(rel);
      add(name, [rel](const Ctx& c) { return c.word(rel); });
    }
    add("x.conj.w-1|w0", [](const Ctx& c) { return join(c.word(-1), c.word(0)); });
    add("x.conj.w0|w+1", [](const Ctx& c) { return join(c.word(0), c.word(+1)); });
    add("x.wstress-1", [](const Ctx& c) { return c.word_stress(-1); });
    add("x.wstress0", [](const Ctx& c) { return c.word_stress(0); });
    add("x.wstress+1", [](const Ctx& c) { return c.word_stress(+1); });

    // POS (optional annotation column)
    add("x.pos-1", [](const Ctx& c) { return c.pos_tag(-1); });
    add("x.pos0", [](const Ctx& c) { return c.pos_tag(0); });
    add("x.pos+1", [](const Ctx& c) { return c.pos_tag(+1); });
    add("x.conj.pos0|w0", [](const Ctx& c) { return join(c.pos_tag(0), c.word(0)); });

    // character n-grams of the observation and the word
    for (int k : {1, 2, 3, 4}) {
      add("x.opfx" + std::to_string(k),
          [k](const Ctx& c) { return utf8::prefix(c.obs(0), k); });
    }
    for (int k : {1, 2, 3, 4}) {
      add("x.osfx" + std::to_string(k),
          [k](const Ctx& c) { return utf8::suffix(c.obs(0), k); });
    }
    for (int k : {1, 2}) {
      add("x.wpfx" + std::to_string(k), [k](const Ctx& c) -> std::optional<std::string> {
        auto w = c.word(0);
        if (!w) return std::nullopt;
        return utf8::prefix(*w, k);
      });
    }
    for (int k : {1, 2}) {
      add("x.wsfx" + std::to_string(k), [k](const Ctx& c) -> std::optional<std::string> {
        auto w = c.word(0);
        if (!w) return std::nullopt;
        return utf8::suffix(*w, k);
      });
    }

    // positional information
    add("x.wordinitial", [](const Ctx& c) -> std::optional<std::string> {
      PositionInWord p = c.seq->piw[c.pos];
      return std::string(p == PositionInWord::Initial || p == PositionInWord::Only ? "y" : "n");
    });
    add("x.wordfinal", [](const Ctx& c) -> std::optional<std::string> {
      PositionInWord p = c.seq->piw[c.pos];
      return std::string(p == PositionInWord::Final || p == PositionInWord::Only ? "y" : "n");
    });
    add("x.dstart", [](const Ctx& c) { return Ctx::bucket(c.pos); });
    add("x.dend", [](const Ctx& c) { return Ctx::bucket(c.n() - 1 - c.pos); });
    add("x.sylidx", [](const Ctx& c) -> std::optional<std::string> {
      int s = c.seq->syll_of[c.pos];
      if (s < 0) return std::nullopt;
      return Ctx::bucket(s);
    });
    add("x.sylridx", [](const Ctx& c) -> std::optional<std::string> {
      int s = c.seq->syll_of[c.pos];
      if (s < 0) return std::nullopt;
      return Ctx::bucket(c.seq->word_sylls[c.pos] - 1 - s);
    });

    // mixed conjunctions
    add("x.conj.o0|piw", [](const Ctx& c) { return c.obs(0) + "|" + c.piw_value(); });
    add("x.conj.o0|w0", [](const Ctx& c) { return join(c.obs(0), c.word(0)); });
    add("x.conj.ls0|o0", [](const Ctx& c) { return join(c.ls(0), c.obs(0)); });

    return r;
  }();
  return defs;
}

inline FeatureVector extract_range(const EncodedSequence& seq, int pos, const Line* line,
                                   size_t count, FeatureAlphabet& alphabet) {
  if (pos < 0 || pos >= static_cast<int>(seq.size()))
    throw std::out_of_range("feature extraction position " + std::to_string(pos) +
                            " out of range for sequence '" + seq.origin + "'");
  Ctx ctx{&seq, line, pos};
  FeatureVector fv;
  const auto& defs = registry();
  for (size_t t = 0; t < count; ++t) {
    if (auto value = defs[t].emit(ctx))
      fv.indices.push_back(alphabet.lookup(defs[t].name + "=" + *value));
  }
  std::sort(fv.indices.begin(), fv.indices.end());
  fv.indices.erase(std::unique(fv.indices.begin(), fv.indices.end()), fv.indices.end());
  return fv;
}

}  // namespace detail

inline constexpr size_t kBasicTemplateCount = 10;
inline constexpr size_t kFullTemplateCount = 64;

inline size_t registry_size() { return detail::registry().size(); }

inline FeatureVector extract_basic10(const EncodedSequence& seq, int pos,
                                     FeatureAlphabet& alphabet) {
  return detail::extract_range(seq, pos, nullptr, kBasicTemplateCount, alphabet);
}

inline FeatureVector extract_full64(const EncodedSequence& seq, int pos, const Line& line,
                                    FeatureAlphabet& alphabet) {
  return detail::extract_range(seq, pos, &line, kFullTemplateCount, alphabet);
}

inline FeatureVector extract(const EncodedSequence& seq, int pos, const Line& line,
                             FeatureSet set, FeatureAlphabet& alphabet) {
  return set == FeatureSet::Basic10 ? extract_basic10(seq, pos, alphabet)
                                    : extract_full64(seq, pos, line, alphabet);
}

// Versioned text manifest of the template registry, one name per line.
inline std::string template_manifest() {
  std::string out = "metron-feature-templates v1\n";
  for (const auto& def : detail::registry()) out += def.name + "\n";
  return out;
}

// A sequence together with its per-position static feature vectors; the unit
// the feature-based taggers train on.
struct FeaturizedSequence {
  EncodedSequence seq;
  std::vector<FeatureVector> feats;
};

inline FeaturizedSequence featurize(const EncodedSequence& seq, const Line& line, FeatureSet set,
                                    FeatureAlphabet& alphabet) {
  FeaturizedSequence out;
  out.seq = seq;
  out.feats.reserve(seq.size());
  for (int i = 0; i < static_cast<int>(seq.size()); ++i)
    out.feats.push_back(extract(seq, i, line, set, alphabet));
  return out;
}

}  // namespace metron::features
