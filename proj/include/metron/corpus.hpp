// Core data model for annotated verse: stress labels, words, lines, corpora.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace metron {

enum class Language : uint8_t { EN, ES };

inline const char* language_name(Language l) { return l == Language::EN ? "en" : "es"; }

inline Language parse_language(const std::string& s) {
  if (s == "en") return Language::EN;
  if (s == "es") return Language::ES;
  throw std::invalid_argument("unknown language tag: '" + s + "'");
}

// Atomic stress symbol. Boundary only ever appears in WB-encoded model
// sequences, never in gold annotations.
enum class StressLabel : uint8_t { Stressed, Unstressed, Boundary };

inline char stress_char(StressLabel s) {
  switch (s) {
    case StressLabel::Stressed: return '+';
    case StressLabel::Unstressed: return '-';
    default: return '|';
  }
}

inline StressLabel parse_stress_char(char c) {
  switch (c) {
    case '+': return StressLabel::Stressed;
    case '-': return StressLabel::Unstressed;
    case '|': return StressLabel::Boundary;
    default: throw std::invalid_argument(std::string("invalid stress symbol: '") + c + "'");
  }
}

using StressSeq = std::vector<StressLabel>;

inline std::string stress_string(const StressSeq& seq) {
  std::string out;
  out.reserve(seq.size());
  for (StressLabel s : seq) out.push_back(stress_char(s));
  return out;
}

// Parses a "+-..." string. Boundary symbols are rejected unless allowed,
// since gold annotations are binary.
inline StressSeq parse_stress_string(const std::string& s, bool allow_boundary = false) {
  StressSeq out;
  out.reserve(s.size());
  for (char c : s) {
    StressLabel l = parse_stress_char(c);
    if (l == StressLabel::Boundary && !allow_boundary)
      throw std::invalid_argument("boundary symbol '|' not allowed in gold stress string");
    out.push_back(l);
  }
  return out;
}

struct Word {
  std::string surface;
  std::vector<std::string> syllables;
  std::optional<StressSeq> lexical_stress;  // one label per syllable when present
  std::optional<std::string> pos;

  int syllable_count() const { return static_cast<int>(syllables.size()); }
};

// A synalepha join: syllable (word, syll) merges with the first syllable of
// the following word into one metrical segment.
struct Merge {
  int word = 0;
  int syll = 0;
  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Line {
  std::string id;
  Language language = Language::EN;
  std::vector<Word> words;
  std::vector<StressSeq> gold;   // one or more reference analyses
  std::vector<Merge> merges;     // synalepha joins; empty for EN

  int syllable_count() const {
    int n = 0;
    for (const Word& w : words) n += w.syllable_count();
    return n;
  }

  // Metrical segments: syllables minus synalepha joins.
  int segment_count() const { return syllable_count() - static_cast<int>(merges.size()); }
};

struct Corpus {
  std::string name;
  Language language = Language::EN;
  std::vector<Line> lines;

  bool empty() const { return lines.empty(); }
  size_t size() const { return lines.size(); }
};

namespace detail {

// ASCII-only lowercase; multi-byte UTF-8 sequences pass through untouched.
inline std::string ascii_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline constexpr const char* kMergeMarker = "‿";  // undertie, joins merged segments

inline std::string strip_merge_marker(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  const std::string marker = kMergeMarker;
  while (i < s.size()) {
    if (s.compare(i, marker.size(), marker) == 0) {
      i += marker.size();
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

}  // namespace detail

// Structural checks that need no language knowledge. Length consistency
// against segment counts lives in phonology::finalize_line, which also
// computes merges.
inline void check_word(const Word& w, const std::string& line_id) {
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("line '" + line_id + "': " + msg);
  };
  if (w.surface.empty()) fail("word with empty surface");
  if (w.syllables.empty()) fail("word '" + w.surface + "' has no syllables");
  std::string joined;
  for (const std::string& s : w.syllables) {
    if (s.empty()) fail("word '" + w.surface + "' has an empty syllable");
    joined += detail::strip_merge_marker(s);
  }
  if (detail::ascii_lower(joined) != detail::ascii_lower(w.surface))
    fail("syllables '" + joined + "' do not spell word '" + w.surface + "'");
  if (w.lexical_stress && static_cast<int>(w.lexical_stress->size()) != w.syllable_count())
    fail("word '" + w.surface + "' lexical stress length != syllable count");
}

inline void check_line_structure(const Line& line) {
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("line '" + line.id + "': " + msg);
  };
  if (line.words.empty()) fail("no words");
  for (const Word& w : line.words) check_word(w, line.id);
  if (line.gold.empty()) fail("no gold reference");
  std::set<std::string> seen;
  for (const StressSeq& ref : line.gold) {
    for (StressLabel s : ref)
      if (s == StressLabel::Boundary) fail("boundary symbol in gold reference");
    if (!seen.insert(stress_string(ref)).second) fail("duplicate gold references");
  }
}

// Gold length must equal the metrical segment count (after synalepha for ES).
inline void check_line_lengths(const Line& line) {
  int segments = line.segment_count();
  for (const StressSeq& ref : line.gold) {
    if (static_cast<int>(ref.size()) != segments)
      throw std::invalid_argument(
          "line '" + line.id + "': gold reference '" + stress_string(ref) + "' has " +
          std::to_string(ref.size()) + " labels but the line has " +
          std::to_string(segments) + " metrical segments");
  }
}

inline void check_corpus(const Corpus& corpus) {
  std::set<std::string> ids;
  for (const Line& line : corpus.lines) {
    if (line.language != corpus.language)
      throw std::invalid_argument("line '" + line.id + "' does not share the corpus language");
    if (!ids.insert(line.id).second)
      throw std::invalid_argument("duplicate line id '" + line.id + "'");
  }
}

}  // namespace metron
