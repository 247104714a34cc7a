// Converts Lines into model-ready observation/label sequences under the three
// regimes: syllable-to-stress (S2S), S2S with word-boundary markers, and
// word-to-stress-pattern (W2SP).
#pragma once

#include <string>
#include <vector>

#include "metron/corpus.hpp"
#include "metron/phonology.hpp"

namespace metron {

enum class Mode : uint8_t { S2S, S2S_WB, W2SP };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::S2S: return "s2s";
    case Mode::S2S_WB: return "s2s+wb";
    default: return "w2sp";
  }
}

inline Mode parse_mode(const std::string& s) {
  if (s == "s2s") return Mode::S2S;
  if (s == "s2s+wb" || s == "s2s_wb") return Mode::S2S_WB;
  if (s == "w2sp") return Mode::W2SP;
  throw std::invalid_argument("unknown mode: '" + s + "'");
}

inline constexpr const char* kBoundaryToken = "WB";
inline constexpr const char* kBoundaryLabel = "|";

// Position of an observation within its word.
enum class PositionInWord : int8_t { Only, Initial, Medial, Final, BoundaryTok };

struct EncodedSequence {
  Mode mode = Mode::S2S;
  std::string origin;                     // line id
  std::vector<std::string> observations;
  std::vector<std::string> labels;

  // Per-position alignment used by the feature templates.
  std::vector<int> word_of;               // owning word index; -1 for WB tokens
  std::vector<int> syll_of;               // syllable index within the owning word
  std::vector<PositionInWord> piw;
  std::vector<char> lex;                  // '+'/'-' lexical stress, 0 when unknown
  std::vector<std::string> word_surface;  // surface of the owning word
  std::vector<int> word_sylls;            // syllable count of the owning word

  size_t size() const { return observations.size(); }
};

namespace detail {

inline PositionInWord position_in_word(const Word& w, int syll) {
  if (w.syllable_count() == 1) return PositionInWord::Only;
  if (syll == 0) return PositionInWord::Initial;
  if (syll == w.syllable_count() - 1) return PositionInWord::Final;
  return PositionInWord::Medial;
}

inline char segment_lex_stress(const Line& line, const phonology::Segment& seg) {
  auto stress_of = [&](int w, int s) -> char {
    const Word& word = line.words[w];
    if (!word.lexical_stress) return 0;
    return stress_char((*word.lexical_stress)[s]);
  };
  char a = stress_of(seg.word, seg.syll);
  if (!seg.merged) return a;
  char b = stress_of(seg.word2, seg.syll2);
  if (a == 0 || b == 0) return 0;
  return (a == '+' || b == '+') ? '+' : '-';
}

inline void push_segment_position(EncodedSequence& seq, const Line& line,
                                  const phonology::Segment& seg) {
  const Word& w = line.words[seg.word];
  seq.observations.push_back(phonology::segment_text(line.words, seg));
  seq.word_of.push_back(seg.word);
  seq.syll_of.push_back(seg.syll);
  seq.piw.push_back(position_in_word(w, seg.syll));
  seq.lex.push_back(segment_lex_stress(line, seg));
  seq.word_surface.push_back(w.surface);
  seq.word_sylls.push_back(w.syllable_count());
}

inline void push_boundary_position(EncodedSequence& seq) {
  seq.observations.push_back(kBoundaryToken);
  seq.labels.push_back(kBoundaryLabel);
  seq.word_of.push_back(-1);
  seq.syll_of.push_back(-1);
  seq.piw.push_back(PositionInWord::BoundaryTok);
  seq.lex.push_back(0);
  seq.word_surface.push_back("<WB>");
  seq.word_sylls.push_back(0);
}

}  // namespace detail

inline EncodedSequence encode(const Line& line, Mode mode, size_t reference_index = 0) {
  if (reference_index >= line.gold.size())
    throw std::out_of_range("line '" + line.id + "': reference index " +
                            std::to_string(reference_index) + " out of range (" +
                            std::to_string(line.gold.size()) + " references)");
  const StressSeq& gold = line.gold[reference_index];
  const std::vector<phonology::Segment> segments = phonology::build_segments(line);

  EncodedSequence seq;
  seq.mode = mode;
  seq.origin = line.id;

  if (mode == Mode::W2SP) {
    // One observation per word; the label is that word's slice of the gold
    // reference. A merged segment belongs to its left word, so a word whose
    // only syllable merged away gets the empty pattern.
    std::vector<std::string> patterns(line.words.size());
    for (size_t i = 0; i < segments.size(); ++i)
      patterns[segments[i].word].push_back(stress_char(gold[i]));
    for (size_t w = 0; w < line.words.size(); ++w) {
      seq.observations.push_back(line.words[w].surface);
      seq.labels.push_back(patterns[w]);
      seq.word_of.push_back(static_cast<int>(w));
      seq.syll_of.push_back(0);
      seq.piw.push_back(PositionInWord::Only);
      seq.lex.push_back(0);
      seq.word_surface.push_back(line.words[w].surface);
      seq.word_sylls.push_back(line.words[w].syllable_count());
    }
    return seq;
  }

  for (size_t i = 0; i < segments.size(); ++i) {
    if (mode == Mode::S2S_WB && i > 0 && segments[i].word != segments[i - 1].word)
      detail::push_boundary_position(seq);
    detail::push_segment_position(seq, line, segments[i]);
    seq.labels.push_back(std::string(1, stress_char(gold[i])));
  }
  return seq;
}

// Flattens model output labels back into a per-syllable stress sequence.
// Boundary labels are dropped; W2SP patterns are expanded by concatenation.
// Length may legitimately differ from gold; evaluation tolerates that.
inline StressSeq decode_to_stress(const std::vector<std::string>& labels, Mode mode) {
  StressSeq out;
  for (const std::string& label : labels) {
    if (mode != Mode::W2SP && label == kBoundaryLabel) continue;
    for (char c : label) {
      if (c != '+' && c != '-')
        throw std::invalid_argument(std::string("cannot decode label symbol '") + c +
                                    "' in label '" + label + "'");
      out.push_back(parse_stress_char(c));
    }
  }
  return out;
}

}  // namespace metron
