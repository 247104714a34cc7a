// Rule-based syllabification for English and Spanish, lexical stress
// assignment, Spanish synalepha merging, and the per-segment stress heuristic.
#pragma once

#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "metron/corpus.hpp"
#include "metron/utf8.hpp"

namespace metron::phonology {

namespace detail {

inline char32_t lower_cp(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c - U'A' + U'a';
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;  // Latin-1 uppercase
  return c;
}

inline std::vector<char32_t> lower(const std::vector<char32_t>& cps) {
  std::vector<char32_t> out = cps;
  for (char32_t& c : out) c = lower_cp(c);
  return out;
}

inline bool is_plain_vowel(char32_t c) {
  return c == U'a' || c == U'e' || c == U'i' || c == U'o' || c == U'u';
}

inline bool is_accented_vowel(char32_t c) {
  return c == 0xE1 || c == 0xE9 || c == 0xED || c == 0xF3 || c == 0xFA;  // á é í ó ú
}

inline bool is_es_vowel(char32_t c) {
  return is_plain_vowel(c) || is_accented_vowel(c) || c == 0xFC;  // ü
}

// Strong vowels form their own nucleus against another strong vowel;
// accented weak vowels always break a diphthong (hiatus).
inline bool is_es_strong(char32_t c) {
  return c == U'a' || c == U'e' || c == U'o' || c == 0xE1 || c == 0xE9 || c == 0xF3;
}

inline bool is_es_accented_weak(char32_t c) { return c == 0xED || c == 0xFA; }  // í ú

inline bool is_letter(char32_t c) {
  if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) return true;
  if (c >= 0xC0 && c <= 0xFF && c != 0xD7 && c != 0xF7) return true;  // accented Latin
  return false;
}

inline bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019; }

// English onsets a syllable may legally begin with (longest match wins).
inline const std::set<std::string>& en_onsets() {
  static const std::set<std::string> onsets = {
      "bl", "br", "ch", "chr", "cl", "cr", "dr", "dw", "fl", "fr", "gl", "gr",
      "kn", "ph", "pl", "pr", "qu", "sc", "sch", "scr", "sh", "shr", "sk", "sl",
      "sm", "sn", "sp", "sph", "spl", "spr", "squ", "st", "str", "sw", "th",
      "thr", "tr", "tw", "wh", "wr"};
  return onsets;
}

// Hiatus and syllabic-ending words the heuristic gets wrong.
inline const std::unordered_map<std::string, std::vector<std::string>>& en_exceptions() {
  static const std::unordered_map<std::string, std::vector<std::string>> map = {
      {"beloved", {"be", "lov", "ed"}}, {"poem", {"po", "em"}},
      {"poet", {"po", "et"}},           {"being", {"be", "ing"}},
      {"quiet", {"qui", "et"}},         {"lion", {"li", "on"}},
      {"diet", {"di", "et"}},           {"create", {"cre", "ate"}},
  };
  return map;
}

inline const std::unordered_set<std::string>& en_function_words() {
  static const std::unordered_set<std::string> words = {
      "a",   "an",  "the", "of",  "to",   "in",   "on",   "at",  "by",   "for",
      "and", "or",  "but", "nor", "as",   "if",   "is",   "am",  "are",  "was",
      "were", "be", "it",  "its", "his",  "her",  "my",   "thy", "our",  "your",
      "their", "that", "this", "with", "from", "up", "so", "do", "did", "has",
      "had", "have", "can", "will", "would", "shall", "should", "than", "when",
      "while", "though", "i"};
  return words;
}

inline const std::unordered_set<std::string>& es_function_words() {
  static const std::unordered_set<std::string> words = {
      "el", "la",  "los", "las", "un",  "una", "unos", "unas", "lo",  "al",
      "del", "de", "a",   "en",  "con", "por", "para", "sin",  "so",  "sobre",
      "tras", "entre", "hacia", "hasta", "su", "sus",  "mi",   "mis", "tu",
      "tus", "se", "me",  "te",  "le",  "les", "nos",  "os",   "y",   "e",
      "o",  "u",   "ni",  "que", "si",  "mas", "cual", "donde", "como",
      "cuando", "aunque", "pues", "ante", "bajo"};
  return words;
}

inline void validate_word_chars(const std::string& surface, const std::vector<char32_t>& cps) {
  if (cps.empty()) throw std::invalid_argument("cannot syllabify an empty word");
  bool has_letter = false;
  for (char32_t c : cps) {
    if (is_letter(c)) {
      has_letter = true;
    } else if (!is_apostrophe(c)) {
      throw std::invalid_argument("cannot syllabify non-alphabetic word '" + surface + "'");
    }
  }
  if (!has_letter)
    throw std::invalid_argument("cannot syllabify non-alphabetic word '" + surface + "'");
}

inline std::vector<std::string> slice_syllables(const std::vector<char32_t>& original,
                                                const std::vector<int>& boundaries) {
  std::vector<std::string> out;
  int start = 0;
  for (int b : boundaries) {
    out.push_back(utf8::encode(std::vector<char32_t>(original.begin() + start, original.begin() + b)));
    start = b;
  }
  out.push_back(utf8::encode(std::vector<char32_t>(original.begin() + start, original.end())));
  return out;
}

inline std::vector<std::string> syllabify_en(const std::string& surface,
                                             const std::vector<char32_t>& original) {
  std::vector<char32_t> cps = lower(original);
  const int n = static_cast<int>(cps.size());

  // Nucleus detection. 'y' is a vowel anywhere but word-initially; 'u' after
  // 'q' joins the onset.
  std::vector<bool> vowel(n, false);
  for (int i = 0; i < n; ++i) {
    char32_t c = cps[i];
    if (is_plain_vowel(c)) {
      vowel[i] = !(c == U'u' && i > 0 && cps[i - 1] == U'q');
    } else if (c == U'y' && i > 0) {
      vowel[i] = true;
    }
  }

  std::vector<std::pair<int, int>> groups;  // [start, end)
  for (int i = 0; i < n;) {
    if (!vowel[i]) {
      ++i;
      continue;
    }
    int j = i;
    while (j < n && vowel[j]) ++j;
    groups.emplace_back(i, j);
    i = j;
  }
  if (groups.empty()) return {surface};  // no nucleus: keep the word whole

  // Silent final e: a lone final 'e' (optionally followed by s/d) after an
  // earlier nucleus, except the syllabic consonant+"le" ending.
  if (groups.size() >= 2) {
    auto [gs, ge] = groups.back();
    bool lone_e = (ge - gs == 1) && cps[gs] == U'e';
    std::string tail = utf8::encode(std::vector<char32_t>(cps.begin() + ge, cps.end()));
    bool droppable_tail = tail.empty() || tail == "s" || tail == "d";
    bool syllabic_le = gs >= 2 && cps[gs - 1] == U'l' && !vowel[gs - 2] && tail.empty();
    if (lone_e && droppable_tail && !syllabic_le) groups.pop_back();
  }

  // Split each inter-nucleus cluster by giving the following nucleus the
  // longest legal onset.
  std::vector<int> boundaries;
  for (size_t g = 1; g < groups.size(); ++g) {
    int cluster_begin = groups[g - 1].second;
    int cluster_end = groups[g].first;
    int len = cluster_end - cluster_begin;
    int onset = 0;
    if (len == 1) {
      onset = 1;
    } else if (len >= 2) {
      onset = 1;  // a single consonant is always a legal onset
      for (int k = std::min(len, 3); k >= 2; --k) {
        std::string cand = utf8::encode(
            std::vector<char32_t>(cps.begin() + cluster_end - k, cps.begin() + cluster_end));
        if (en_onsets().count(cand)) {
          onset = k;
          break;
        }
      }
    }
    boundaries.push_back(cluster_end - onset);
  }
  return slice_syllables(original, boundaries);
}

// Consonant units for Spanish: the digraphs ch/ll/rr act as single
// consonants, as do qu/gu with a silent u.
inline std::vector<std::pair<int, int>> es_consonant_units(const std::vector<char32_t>& cps,
                                                           int begin, int end,
                                                           const std::vector<bool>& vowel) {
  std::vector<std::pair<int, int>> units;
  int i = begin;
  while (i < end) {
    if (i + 1 < end) {
      char32_t a = cps[i], b = cps[i + 1];
      bool digraph = (a == U'c' && b == U'h') || (a == U'l' && b == U'l') ||
                     (a == U'r' && b == U'r') ||
                     ((a == U'q' || a == U'g') && b == U'u' && !vowel[i + 1]);
      if (digraph) {
        units.emplace_back(i, i + 2);
        i += 2;
        continue;
      }
    }
    units.emplace_back(i, i + 1);
    ++i;
  }
  return units;
}

inline bool es_inseparable(const std::vector<char32_t>& cps, std::pair<int, int> u1,
                           std::pair<int, int> u2) {
  if (u1.second - u1.first != 1 || u2.second - u2.first != 1) return false;
  char32_t a = cps[u1.first], b = cps[u2.first];
  if (b != U'l' && b != U'r') return false;
  static const std::u32string firsts = U"pbfgcktd";
  if (firsts.find(a) == std::u32string::npos) return false;
  if (b == U'l' && (a == U't' || a == U'd')) return false;  // tl/dl split in peninsular usage
  return true;
}

inline std::vector<std::string> syllabify_es(const std::string& surface,
                                             const std::vector<char32_t>& original) {
  std::vector<char32_t> cps = lower(original);
  const int n = static_cast<int>(cps.size());

  std::vector<bool> vowel(n, false);
  for (int i = 0; i < n; ++i) {
    char32_t c = cps[i];
    if (is_es_vowel(c)) {
      // silent u in que/qui and gue/gui (ü is the audible form)
      bool silent_u = c == U'u' && i > 0 && (cps[i - 1] == U'q' || cps[i - 1] == U'g') &&
                      i + 1 < n && (cps[i + 1] == U'e' || cps[i + 1] == U'i' ||
                                    cps[i + 1] == 0xE9 || cps[i + 1] == 0xED);
      vowel[i] = !silent_u;
    } else if (c == U'y' && i == n - 1) {
      vowel[i] = true;  // word-final y closes a diphthong
    }
  }

  // Nuclei: vowel runs, split at hiatus (strong+strong or any accented weak).
  std::vector<std::pair<int, int>> nuclei;
  for (int i = 0; i < n;) {
    if (!vowel[i]) {
      ++i;
      continue;
    }
    int start = i;
    int j = i + 1;
    while (j < n && vowel[j]) {
      char32_t prev = cps[j - 1], cur = cps[j];
      bool hiatus = (is_es_strong(prev) && is_es_strong(cur)) || is_es_accented_weak(prev) ||
                    is_es_accented_weak(cur);
      if (hiatus) break;
      ++j;
    }
    nuclei.emplace_back(start, j);
    i = j;
  }
  if (nuclei.empty()) return {surface};

  std::vector<int> boundaries;
  for (size_t g = 1; g < nuclei.size(); ++g) {
    int cb = nuclei[g - 1].second;
    int ce = nuclei[g].first;
    auto units = es_consonant_units(cps, cb, ce, vowel);
    size_t k = units.size();
    int split;  // index into cps where the next syllable begins
    if (k == 0) {
      split = ce;
    } else if (k == 1) {
      split = units[0].first;
    } else if (k == 2) {
      split = es_inseparable(cps, units[0], units[1]) ? units[0].first : units[1].first;
    } else if (k == 3) {
      split = es_inseparable(cps, units[1], units[2]) ? units[1].first : units[2].first;
    } else {
      split = units[k - 2].first;  // four consonants split two/two
    }
    boundaries.push_back(split);
  }
  return slice_syllables(original, boundaries);
}

}  // namespace detail

// Splits a single word into syllables. The concatenation of the result
// always reproduces the input.
inline std::vector<std::string> syllabify(const std::string& surface, Language language) {
  std::vector<char32_t> cps = utf8::decode(surface);
  detail::validate_word_chars(surface, cps);
  if (language == Language::EN) {
    std::string key = utf8::encode(detail::lower(cps));
    auto it = detail::en_exceptions().find(key);
    if (it != detail::en_exceptions().end()) {
      // Exceptions are stored lowercase; re-slice the original by lengths.
      std::vector<int> boundaries;
      int acc = 0;
      for (size_t i = 0; i + 1 < it->second.size(); ++i) {
        acc += utf8::length(it->second[i]);
        boundaries.push_back(acc);
      }
      return detail::slice_syllables(cps, boundaries);
    }
    return detail::syllabify_en(surface, cps);
  }
  return detail::syllabify_es(surface, cps);
}

// Word -> stress pattern lookup table, loaded from TSV.
class StressLexicon {
 public:
  StressLexicon() = default;

  static StressLexicon from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
    StressLexicon lex;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      size_t tab = line.find('\t');
      if (tab == std::string::npos)
        throw std::runtime_error("lexicon line " + std::to_string(lineno) + ": missing tab");
      lex.add(line.substr(0, tab), line.substr(tab + 1));
    }
    return lex;
  }

  void add(const std::string& surface, const std::string& pattern) {
    entries_[metron::detail::ascii_lower(surface)] = parse_stress_string(pattern);
  }

  const StressSeq* find(const std::string& surface) const {
    auto it = entries_.find(metron::detail::ascii_lower(surface));
    return it == entries_.end() ? nullptr : &it->second;
  }

  size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, StressSeq> entries_;
};

// One label per syllable. English resolves through the lexicon with a
// final-syllable-stress fallback (unknown monosyllabic function words come
// out unstressed); Spanish follows the orthographic accent rules.
inline StressSeq lexical_stress(const Word& word, Language language, const StressLexicon& lexicon) {
  const int n = word.syllable_count();
  if (language == Language::EN) {
    if (const StressSeq* entry = lexicon.find(word.surface)) {
      if (static_cast<int>(entry->size()) == n) return *entry;
    }
    std::string key = metron::detail::ascii_lower(word.surface);
    if (n == 1 && detail::en_function_words().count(key))
      return {StressLabel::Unstressed};
    StressSeq out(n, StressLabel::Unstressed);
    out[n - 1] = StressLabel::Stressed;
    return out;
  }

  // Spanish: written accent wins; otherwise llana for vowel/n/s endings,
  // aguda otherwise.
  StressSeq out(n, StressLabel::Unstressed);
  for (int i = 0; i < n; ++i) {
    for (char32_t c : detail::lower(utf8::decode(word.syllables[i]))) {
      if (detail::is_accented_vowel(c)) {
        out[i] = StressLabel::Stressed;
        return out;
      }
    }
  }
  if (n == 1) {
    out[0] = StressLabel::Stressed;
    return out;
  }
  std::vector<char32_t> cps = detail::lower(utf8::decode(word.surface));
  char32_t last = cps.back();
  bool llana = detail::is_es_vowel(last) || last == U'n' || last == U's' || last == U'y';
  out[llana ? n - 2 : n - 1] = StressLabel::Stressed;
  return out;
}

struct SyllabifiedLine {
  std::vector<Word> words;
  std::vector<Merge> merges;

  int segment_count() const {
    int n = 0;
    for (const Word& w : words) n += w.syllable_count();
    return n - static_cast<int>(merges.size());
  }
};

namespace detail {

inline bool syllable_ends_in_vowel(const std::string& syll) {
  std::vector<char32_t> cps = lower(utf8::decode(metron::detail::strip_merge_marker(syll)));
  if (cps.empty()) return false;
  char32_t last = cps.back();
  return is_es_vowel(last) || last == U'y';
}

inline bool syllable_starts_with_vowel(const std::string& syll) {
  std::vector<char32_t> cps = lower(utf8::decode(metron::detail::strip_merge_marker(syll)));
  if (cps.empty()) return false;
  if (is_es_vowel(cps[0]) || (cps.size() == 1 && cps[0] == U'y')) return true;
  return cps[0] == U'h' && cps.size() > 1 && is_es_vowel(cps[1]);  // silent h
}

}  // namespace detail

// Greedy left-to-right synalepha: a word-final vowel merges with the next
// word's initial vowel (h transparent) into one metrical segment. At most one
// pairwise merge per word boundary; a syllable never joins two merges.
inline SyllabifiedLine apply_synalepha(const std::vector<Word>& words) {
  SyllabifiedLine out;
  out.words = words;
  for (size_t i = 0; i + 1 < words.size(); ++i) {
    const Word& left = words[i];
    const Word& right = words[i + 1];
    if (!out.merges.empty()) {
      const Merge& last = out.merges.back();
      // the left word's first syllable is already part of a merge
      if (last.word == static_cast<int>(i) - 1 && left.syllable_count() == 1) continue;
    }
    if (detail::syllable_ends_in_vowel(left.syllables.back()) &&
        detail::syllable_starts_with_vowel(right.syllables.front())) {
      out.merges.push_back(Merge{static_cast<int>(i), left.syllable_count() - 1});
    }
  }
  return out;
}

// One stress value per metrical segment: merged segments are stressed iff any
// merged syllable carries lexical stress; function words are demoted first.
inline StressSeq heuristic_stress_sequence(const SyllabifiedLine& line,
                                           const StressLexicon& lexicon) {
  std::vector<StressSeq> per_word;
  per_word.reserve(line.words.size());
  for (const Word& w : line.words) {
    std::string key = metron::detail::ascii_lower(w.surface);
    if (detail::es_function_words().count(key)) {
      per_word.emplace_back(w.syllable_count(), StressLabel::Unstressed);
    } else if (w.lexical_stress) {
      per_word.push_back(*w.lexical_stress);
    } else {
      per_word.push_back(lexical_stress(w, Language::ES, lexicon));
    }
  }

  std::set<std::pair<int, int>> merge_left;
  for (const Merge& m : line.merges) merge_left.insert({m.word, m.syll});

  StressSeq out;
  for (size_t w = 0; w < line.words.size(); ++w) {
    for (int s = 0; s < line.words[w].syllable_count(); ++s) {
      bool consumed_by_previous =
          s == 0 && w > 0 &&
          merge_left.count({static_cast<int>(w) - 1, line.words[w - 1].syllable_count() - 1});
      if (consumed_by_previous) continue;
      StressLabel label = per_word[w][s];
      if (merge_left.count({static_cast<int>(w), s})) {
        StressLabel next = per_word[w + 1][0];
        label = (label == StressLabel::Stressed || next == StressLabel::Stressed)
                    ? StressLabel::Stressed
                    : StressLabel::Unstressed;
      }
      out.push_back(label);
    }
  }
  return out;
}

// A metrical segment: one syllable, or two syllables joined by synalepha.
struct Segment {
  int word = 0;   // owning word (the left one for merges)
  int syll = 0;
  bool merged = false;
  int word2 = -1;
  int syll2 = -1;
};

inline std::vector<Segment> build_segments(const std::vector<Word>& words,
                                           const std::vector<Merge>& merges) {
  std::set<std::pair<int, int>> merge_left;
  for (const Merge& m : merges) merge_left.insert({m.word, m.syll});

  std::vector<Segment> out;
  for (size_t w = 0; w < words.size(); ++w) {
    for (int s = 0; s < words[w].syllable_count(); ++s) {
      bool consumed = s == 0 && w > 0 &&
                      merge_left.count({static_cast<int>(w) - 1, words[w - 1].syllable_count() - 1});
      if (consumed) continue;
      Segment seg;
      seg.word = static_cast<int>(w);
      seg.syll = s;
      if (merge_left.count({static_cast<int>(w), s})) {
        seg.merged = true;
        seg.word2 = static_cast<int>(w) + 1;
        seg.syll2 = 0;
      }
      out.push_back(seg);
    }
  }
  return out;
}

inline std::vector<Segment> build_segments(const Line& line) {
  return build_segments(line.words, line.merges);
}

inline std::string segment_text(const std::vector<Word>& words, const Segment& seg) {
  const std::string& left = words[seg.word].syllables[seg.syll];
  if (!seg.merged) return left;
  return left + metron::detail::kMergeMarker + words[seg.word2].syllables[seg.syll2];
}

// Canonical line validation: structural checks, synalepha merges for Spanish,
// and gold-length consistency against the segment count.
inline void finalize_line(Line& line) {
  check_line_structure(line);
  if (line.language == Language::ES) {
    line.merges = apply_synalepha(line.words).merges;
  } else {
    line.merges.clear();
  }
  check_line_lengths(line);
}

}  // namespace metron::phonology
