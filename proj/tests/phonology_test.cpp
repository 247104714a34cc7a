// Tests for syllabification, lexical stress, synalepha, and the per-segment
// stress heuristic.

#include <gtest/gtest.h>

#include <random>

#include "metron/phonology.hpp"
#include "metron/synthetic.hpp"

namespace metron {
namespace {

using phonology::apply_synalepha;
using phonology::heuristic_stress_sequence;
using phonology::lexical_stress;
using phonology::StressLexicon;
using phonology::syllabify;

std::vector<std::string> syl(const char* w, Language lang) { return syllabify(w, lang); }

Word make_word(const std::string& surface, Language lang) {
  Word w;
  w.surface = surface;
  w.syllables = syllabify(surface, lang);
  return w;
}

std::vector<Word> make_words(const std::vector<std::string>& surfaces, Language lang) {
  std::vector<Word> out;
  for (const std::string& s : surfaces) out.push_back(make_word(s, lang));
  return out;
}

TEST(SyllabifyEnTest, FootExamples) {
  EXPECT_EQ(syl("balloon", Language::EN), (std::vector<std::string>{"bal", "loon"}));
  EXPECT_EQ(syl("jungle", Language::EN), (std::vector<std::string>{"jun", "gle"}));
  EXPECT_EQ(syl("accident", Language::EN), (std::vector<std::string>{"ac", "ci", "dent"}));
  EXPECT_EQ(syl("comprehend", Language::EN), (std::vector<std::string>{"com", "pre", "hend"}));
}

TEST(SyllabifyEnTest, SilentFinalE) {
  EXPECT_EQ(syl("like", Language::EN).size(), 1u);
  EXPECT_EQ(syl("change", Language::EN).size(), 1u);
  EXPECT_EQ(syl("table", Language::EN), (std::vector<std::string>{"ta", "ble"}));
}

TEST(SyllabifyEnTest, MonosyllablesAndApostrophes) {
  for (const char* w : {"I", "don't", "to", "brag", "and", "boast", "the", "jaws", "catch"})
    EXPECT_EQ(syl(w, Language::EN).size(), 1u) << w;
}

TEST(SyllabifyEnTest, ExceptionLexicon) {
  EXPECT_EQ(syl("beloved", Language::EN), (std::vector<std::string>{"be", "lov", "ed"}));
  EXPECT_EQ(syl("poem", Language::EN), (std::vector<std::string>{"po", "em"}));
}

TEST(SyllabifyEsTest, StandardRules) {
  EXPECT_EQ(syl("adelanta", Language::ES), (std::vector<std::string>{"a", "de", "lan", "ta"}));
  EXPECT_EQ(syl("fábrica", Language::ES), (std::vector<std::string>{"fá", "bri", "ca"}));
  EXPECT_EQ(syl("ruinas", Language::ES), (std::vector<std::string>{"rui", "nas"}));
  EXPECT_EQ(syl("perro", Language::ES), (std::vector<std::string>{"pe", "rro"}));
  EXPECT_EQ(syl("calle", Language::ES), (std::vector<std::string>{"ca", "lle"}));
  EXPECT_EQ(syl("ahora", Language::ES), (std::vector<std::string>{"a", "ho", "ra"}));
  EXPECT_EQ(syl("día", Language::ES), (std::vector<std::string>{"dí", "a"}));
  EXPECT_EQ(syl("fuerza", Language::ES), (std::vector<std::string>{"fuer", "za"}));
  EXPECT_EQ(syl("instante", Language::ES), (std::vector<std::string>{"ins", "tan", "te"}));
  EXPECT_EQ(syl("aunque", Language::ES), (std::vector<std::string>{"aun", "que"}));
  EXPECT_EQ(syl("guerra", Language::ES), (std::vector<std::string>{"gue", "rra"}));
}

TEST(SyllabifyTest, InvalidInputRejected) {
  EXPECT_THROW(syllabify("", Language::EN), std::invalid_argument);
  EXPECT_THROW(syllabify("123", Language::EN), std::invalid_argument);
  EXPECT_THROW(syllabify("two words", Language::ES), std::invalid_argument);
  EXPECT_THROW(syllabify("''", Language::EN), std::invalid_argument);
}

// Concatenation property over fixtures and generated pseudo-words.
TEST(SyllabifyPropertyTest, ConcatenationReproducesWord) {
  std::vector<std::string> words = {"balloon", "jungle",  "accident", "comprehend", "beloved",
                                    "many",    "change",  "grant",    "wilt",       "thy",
                                    "thought", "boast",   "don't"};
  for (const std::string& w : words) {
    std::string joined;
    for (const std::string& s : syllabify(w, Language::EN)) joined += s;
    EXPECT_EQ(detail::ascii_lower(joined), detail::ascii_lower(w)) << w;
  }
  std::vector<std::string> es = {"adelanta", "fábrica", "ruinas", "su", "en", "tus",
                                 "hermosura", "ciudad", "corazón", "aunque", "guerra"};
  for (const std::string& w : es) {
    std::string joined;
    for (const std::string& s : syllabify(w, Language::ES)) joined += s;
    EXPECT_EQ(joined, w) << w;
  }
}

TEST(LexicalStressEnTest, LexiconAndFallbacks) {
  StressLexicon lex;
  lex.add("balloon", "-+");
  EXPECT_EQ(stress_string(lexical_stress(make_word("balloon", Language::EN), Language::EN, lex)),
            "-+");
  // unknown monosyllabic function word: unstressed
  EXPECT_EQ(stress_string(lexical_stress(make_word("the", Language::EN), Language::EN, lex)), "-");
  // unknown monosyllabic content word: stressed (final-syllable rule)
  EXPECT_EQ(stress_string(lexical_stress(make_word("brag", Language::EN), Language::EN, lex)), "+");
  // unknown polysyllable: final-syllable stress
  EXPECT_EQ(stress_string(lexical_stress(make_word("jungle", Language::EN), Language::EN, lex)),
            "-+");
}

TEST(LexicalStressEnTest, LexiconLengthMismatchFallsBack) {
  StressLexicon lex;
  lex.add("jungle", "+-+");  // wrong arity; must be ignored
  EXPECT_EQ(stress_string(lexical_stress(make_word("jungle", Language::EN), Language::EN, lex)),
            "-+");
}

TEST(LexicalStressEsTest, AccentRules) {
  StressLexicon lex;
  EXPECT_EQ(stress_string(lexical_stress(make_word("fábrica", Language::ES), Language::ES, lex)),
            "+--");
  EXPECT_EQ(stress_string(lexical_stress(make_word("adelanta", Language::ES), Language::ES, lex)),
            "--+-");
  EXPECT_EQ(stress_string(lexical_stress(make_word("corazón", Language::ES), Language::ES, lex)),
            "--+");
  EXPECT_EQ(stress_string(lexical_stress(make_word("reloj", Language::ES), Language::ES, lex)),
            "-+");
  EXPECT_EQ(stress_string(lexical_stress(make_word("sol", Language::ES), Language::ES, lex)), "+");
}

// Deterministic, exactly one stressed syllable per content word.
TEST(LexicalStressEsTest, StressTotalityProperty) {
  StressLexicon lex;
  for (const char* w : {"adelanta", "fábrica", "ruinas", "hermosura", "ciudad", "corazón",
                        "guerra", "instante", "día", "fuerza"}) {
    StressSeq s = lexical_stress(make_word(w, Language::ES), Language::ES, lex);
    int stressed = 0;
    for (StressLabel l : s) stressed += l == StressLabel::Stressed ? 1 : 0;
    EXPECT_EQ(stressed, 1) << w;
    EXPECT_EQ(lexical_stress(make_word(w, Language::ES), Language::ES, lex), s) << w;
  }
}

const std::vector<std::string> kSampleLine = {"su", "fábrica", "en", "tus", "ruinas", "adelanta"};

TEST(SynalephaTest, SampleLineHasElevenSegments) {
  auto sl = apply_synalepha(make_words(kSampleLine, Language::ES));
  EXPECT_EQ(sl.segment_count(), 11);
  ASSERT_EQ(sl.merges.size(), 1u);
  // "fábrica" + "en": final 'ca' merges with 'en'
  EXPECT_EQ(sl.merges[0].word, 1);
  EXPECT_EQ(sl.merges[0].syll, 2);
}

TEST(SynalephaTest, NoVowelContactMeansNoMerges) {
  auto sl = apply_synalepha(make_words({"tus", "ruinas"}, Language::ES));
  EXPECT_TRUE(sl.merges.empty());
  EXPECT_EQ(sl.segment_count(), 3);
}

TEST(SynalephaTest, SilentHIsTransparent) {
  auto sl = apply_synalepha(make_words({"la", "hora"}, Language::ES));
  ASSERT_EQ(sl.merges.size(), 1u);
  EXPECT_EQ(sl.segment_count(), 2);
}

TEST(SynalephaTest, NoChainedTripleMerge) {
  // "va a una": both boundaries are vowel contacts around the monosyllable
  // "a"; only the first may merge.
  auto sl = apply_synalepha(make_words({"va", "a", "una"}, Language::ES));
  ASSERT_EQ(sl.merges.size(), 1u);
  EXPECT_EQ(sl.merges[0].word, 0);
}

TEST(SynalephaPropertyTest, SegmentCountMonotone) {
  std::mt19937_64 rng(4);
  std::vector<std::string> pool = {"su",   "fábrica", "en",     "tus",  "ruinas", "adelanta",
                                   "la",   "hora",    "guerra", "alma", "de",     "oro",
                                   "cielo", "azul"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> surfaces;
    int len = 2 + static_cast<int>(rng() % 5);
    for (int i = 0; i < len; ++i) surfaces.push_back(pool[rng() % pool.size()]);
    auto words = make_words(surfaces, Language::ES);
    auto sl = apply_synalepha(words);
    int syllables = 0;
    for (const Word& w : words) syllables += w.syllable_count();
    EXPECT_LE(sl.segment_count(), syllables);
    EXPECT_EQ(sl.segment_count() == syllables, sl.merges.empty());
  }
}

TEST(HeuristicStressTest, SampleLineStrongBeatsAt2_6_10) {
  StressLexicon lex;
  auto sl = apply_synalepha(make_words(kSampleLine, Language::ES));
  StressSeq seq = heuristic_stress_sequence(sl, lex);
  EXPECT_EQ(stress_string(seq), "-+---+---+-");
  ASSERT_EQ(seq.size(), 11u);
  for (size_t i = 0; i < seq.size(); ++i) {
    bool strong = i == 1 || i == 5 || i == 9;  // 1-indexed positions 2, 6, 10
    EXPECT_EQ(seq[i] == StressLabel::Stressed, strong) << "segment " << i + 1;
  }
}

TEST(HeuristicStressTest, AllFunctionWordsAllUnstressed) {
  StressLexicon lex;
  auto sl = apply_synalepha(make_words({"en", "la", "de", "su"}, Language::ES));
  for (StressLabel l : heuristic_stress_sequence(sl, lex))
    EXPECT_EQ(l, StressLabel::Unstressed);
}

TEST(HeuristicStressTest, SingleContentWordEqualsLexicalStress) {
  StressLexicon lex;
  auto sl = apply_synalepha(make_words({"adelanta"}, Language::ES));
  EXPECT_EQ(stress_string(heuristic_stress_sequence(sl, lex)), "--+-");
}

TEST(HeuristicStressTest, LengthEqualsSegmentCount) {
  StressLexicon lex;
  auto sl = apply_synalepha(make_words(kSampleLine, Language::ES));
  EXPECT_EQ(static_cast<int>(heuristic_stress_sequence(sl, lex).size()), sl.segment_count());
}

TEST(StressLexiconTest, LoadsTsvWithComments) {
  StressLexicon lex = StressLexicon::from_file(std::string(METRON_DATA_DIR) + "/lexicon_en.tsv");
  ASSERT_NE(lex.find("balloon"), nullptr);
  EXPECT_EQ(stress_string(*lex.find("balloon")), "-+");
  ASSERT_NE(lex.find("Jungle"), nullptr) << "lookup is case-insensitive";
  EXPECT_EQ(lex.find("nosuchword"), nullptr);
}

TEST(StressLexiconTest, MissingFileIsAnError) {
  EXPECT_THROW(StressLexicon::from_file("/no/such/lexicon.tsv"), std::runtime_error);
}

TEST(FinalizeLineTest, ComputesMergesForSpanish) {
  Line line;
  line.id = "es1";
  line.language = Language::ES;
  line.words = make_words(kSampleLine, Language::ES);
  StressLexicon lex;
  line.gold = {heuristic_stress_sequence(apply_synalepha(line.words), lex)};
  phonology::finalize_line(line);
  EXPECT_EQ(line.merges.size(), 1u);
  EXPECT_EQ(line.segment_count(), 11);
}

}  // namespace
}  // namespace metron
