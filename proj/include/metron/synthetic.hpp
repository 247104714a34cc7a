// Synthetic metered corpora for desk-scale experiments: a meter-driven
// generator (gold follows a repeating foot pattern) and a positional one
// (stress determined by within-word position, Spanish-like word lengths).
#pragma once

#include <random>
#include <string>
#include <vector>

#include "metron/corpus.hpp"
#include "metron/phonology.hpp"

namespace metron {

enum class Foot : uint8_t { Iamb, Trochee, Dactyl, Anapest };

inline const char* foot_name(Foot f) {
  switch (f) {
    case Foot::Iamb: return "iamb";
    case Foot::Trochee: return "trochee";
    case Foot::Dactyl: return "dactyl";
    default: return "anapest";
  }
}

inline Foot parse_foot(const std::string& s) {
  if (s == "iamb") return Foot::Iamb;
  if (s == "trochee") return Foot::Trochee;
  if (s == "dactyl") return Foot::Dactyl;
  if (s == "anapest") return Foot::Anapest;
  throw std::invalid_argument("unknown foot: '" + s + "' (iamb|trochee|dactyl|anapest)");
}

inline std::string foot_pattern(Foot f) {
  switch (f) {
    case Foot::Iamb: return "-+";
    case Foot::Trochee: return "+-";
    case Foot::Dactyl: return "+--";
    default: return "--+";
  }
}

struct MeterSpec {
  Foot foot = Foot::Iamb;
  int feet = 5;

  StressSeq pattern() const {
    std::string p = foot_pattern(foot);
    StressSeq out;
    for (int i = 0; i < feet; ++i)
      for (char c : p) out.push_back(parse_stress_char(c));
    return out;
  }

  std::string name() const { return std::string(foot_name(foot)) + "x" + std::to_string(feet); }
};

namespace detail {

// Disjoint inventories so the syllable class determines the label and the
// noise-free corpus has zero Bayes error.
inline const std::vector<std::string>& stressed_inventory() {
  static const std::vector<std::string> v = {"dum", "tor", "bek", "mon", "zar",
                                             "gul", "ped", "vik", "nor", "sab"};
  return v;
}

inline const std::vector<std::string>& unstressed_inventory() {
  static const std::vector<std::string> v = {"deh", "la", "mi", "po", "ne",
                                             "ri", "fu", "co", "ga", "ve"};
  return v;
}

// Shared inventory for the positional generator: syllable identity carries no
// stress information there.
inline const std::vector<std::string>& positional_inventory() {
  static const std::vector<std::string> v = {"ta", "ra", "mo", "li", "su", "ne", "do", "ki"};
  return v;
}

inline int draw_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive bounds
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline void maybe_flip_one_label(StressSeq& gold, double noise, std::mt19937_64& rng) {
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < noise) {
    int pos = draw_int(rng, 0, static_cast<int>(gold.size()) - 1);
    gold[pos] = gold[pos] == StressLabel::Stressed ? StressLabel::Unstressed
                                                   : StressLabel::Stressed;
  }
}

}  // namespace detail

// Every line's gold follows the meter's repeating pattern; with probability
// `noise` per line exactly one label is flipped. Deterministic under seed.
inline Corpus generate_synthetic(const MeterSpec& meter, int n_lines, double noise,
                                 uint64_t seed) {
  if (noise < 0.0 || noise > 1.0) throw std::invalid_argument("noise must be in [0,1]");
  if (meter.feet <= 0) throw std::invalid_argument("feet must be positive");
  Corpus corpus;
  corpus.name = "synthetic-" + meter.name();
  corpus.language = Language::EN;

  std::mt19937_64 rng(seed);
  const StressSeq pattern = meter.pattern();
  const int len = static_cast<int>(pattern.size());

  for (int i = 0; i < n_lines; ++i) {
    Line line;
    line.id = "syn-" + std::to_string(i);
    line.language = Language::EN;

    // Group consecutive meter positions into words of one to three syllables.
    int pos = 0;
    while (pos < len) {
      int max_len = std::min(3, len - pos);
      int wlen = detail::draw_int(rng, 1, max_len);
      Word w;
      for (int k = 0; k < wlen; ++k) {
        const auto& inv = pattern[pos + k] == StressLabel::Stressed
                              ? detail::stressed_inventory()
                              : detail::unstressed_inventory();
        w.syllables.push_back(inv[detail::draw_int(rng, 0, static_cast<int>(inv.size()) - 1)]);
      }
      for (const std::string& s : w.syllables) w.surface += s;
      line.words.push_back(std::move(w));
      pos += wlen;
    }

    StressSeq gold = pattern;
    detail::maybe_flip_one_label(gold, noise, rng);
    line.gold.push_back(std::move(gold));
    phonology::finalize_line(line);
    corpus.lines.push_back(std::move(line));
  }
  return corpus;
}

// Multisyllabic words built from a shared syllable inventory; the penultimate
// syllable of every word is stressed, so the label depends on within-word
// position only. Word-boundary information is what makes this learnable.
inline Corpus generate_positional(int n_lines, int words_per_line, double noise, uint64_t seed) {
  if (noise < 0.0 || noise > 1.0) throw std::invalid_argument("noise must be in [0,1]");
  if (words_per_line <= 0) throw std::invalid_argument("words_per_line must be positive");
  Corpus corpus;
  corpus.name = "synthetic-positional";
  corpus.language = Language::ES;

  std::mt19937_64 rng(seed);
  const auto& inv = detail::positional_inventory();

  for (int i = 0; i < n_lines; ++i) {
    Line line;
    line.id = "pos-" + std::to_string(i);
    line.language = Language::ES;
    StressSeq gold;
    for (int w = 0; w < words_per_line; ++w) {
      int wlen = detail::draw_int(rng, 2, 4);
      Word word;
      for (int k = 0; k < wlen; ++k) {
        word.syllables.push_back(inv[detail::draw_int(rng, 0, static_cast<int>(inv.size()) - 1)]);
        gold.push_back(k == wlen - 2 ? StressLabel::Stressed : StressLabel::Unstressed);
      }
      for (const std::string& s : word.syllables) word.surface += s;
      line.words.push_back(std::move(word));
    }
    detail::maybe_flip_one_label(gold, noise, rng);
    line.gold.push_back(std::move(gold));
    phonology::finalize_line(line);
    corpus.lines.push_back(std::move(line));
  }
  return corpus;
}

}  // namespace metron
