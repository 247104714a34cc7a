// Tests for the feature-template registry and extraction.

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "metron/features.hpp"
#include "metron/synthetic.hpp"

namespace metron {
namespace {

using features::extract_basic10;
using features::extract_full64;
using features::FeatureAlphabet;
using features::FeatureVector;

Line balloon_line() {
  Line line;
  line.id = "l1";
  line.language = Language::EN;
  Word w;
  w.surface = "balloon";
  w.syllables = {"bal", "loon"};
  line.words = {w};
  line.gold = {parse_stress_string("-+")};
  phonology::finalize_line(line);
  return line;
}

// "the jungle" with POS tags and lexical stress, the hand-oracle fixture.
Line annotated_jungle_line() {
  Line line;
  line.id = "l2";
  line.language = Language::EN;
  Word the;
  the.surface = "the";
  the.syllables = {"the"};
  the.lexical_stress = parse_stress_string("-");
  the.pos = "DT";
  Word jungle;
  jungle.surface = "jungle";
  jungle.syllables = {"jun", "gle"};
  jungle.lexical_stress = parse_stress_string("+-");
  jungle.pos = "NN";
  line.words = {the, jungle};
  line.gold = {parse_stress_string("-+-")};
  phonology::finalize_line(line);
  return line;
}

std::set<std::string> names_of(const FeatureVector& fv, const FeatureAlphabet& alphabet) {
  std::set<std::string> out;
  for (uint32_t id : fv.indices) out.insert(alphabet.name(id));
  return out;
}

TEST(FeatureRegistryTest, ExactlySixtyFourTemplates) {
  EXPECT_EQ(features::registry_size(), 64u);
  EXPECT_EQ(features::kBasicTemplateCount, 10u);
}

TEST(FeatureRegistryTest, ManifestListsAllTemplates) {
  std::string manifest = features::template_manifest();
  std::istringstream in(manifest);
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  EXPECT_EQ(line, "metron-feature-templates v1");
  int count = 0;
  std::set<std::string> names;
  while (std::getline(in, line)) {
    ++count;
    names.insert(line);
  }
  EXPECT_EQ(count, 64);
  EXPECT_EQ(names.size(), 64u) << "template names must be unique";
  EXPECT_TRUE(names.count("b01.o0"));
  EXPECT_TRUE(names.count("x.sylridx"));
}

TEST(Basic10Test, BalloonPositionZero) {
  Line line = balloon_line();
  EncodedSequence seq = encode(line, Mode::S2S);
  FeatureAlphabet alphabet;
  FeatureVector fv = extract_basic10(seq, 0, alphabet);

  std::set<std::string> expected = {
      "b01.o0=bal",    "b02.o-1=<BOS>", "b03.o+1=loon", "b04.o-2=<BOS>", "b05.o+2=<EOS>",
      "b06.w0=balloon", "b07.piw=initial", "b08.wlen=2", "b09.osfx3=bal", "b10.opfx3=bal"};
  EXPECT_EQ(names_of(fv, alphabet), expected);
  EXPECT_EQ(fv.indices.size(), 10u);
}

TEST(Basic10Test, SingleTokenAllPadding) {
  Line line;
  line.id = "s";
  line.language = Language::EN;
  Word w;
  w.surface = "the";
  w.syllables = {"the"};
  line.words = {w};
  line.gold = {parse_stress_string("-")};
  phonology::finalize_line(line);
  EncodedSequence seq = encode(line, Mode::S2S);
  FeatureAlphabet alphabet;
  std::set<std::string> names = names_of(extract_basic10(seq, 0, alphabet), alphabet);
  EXPECT_TRUE(names.count("b02.o-1=<BOS>"));
  EXPECT_TRUE(names.count("b03.o+1=<EOS>"));
  EXPECT_TRUE(names.count("b04.o-2=<BOS>"));
  EXPECT_TRUE(names.count("b05.o+2=<EOS>"));
  EXPECT_TRUE(names.count("b07.piw=only"));
}

TEST(Basic10Test, PositionOutOfRange) {
  EncodedSequence seq = encode(balloon_line(), Mode::S2S);
  FeatureAlphabet alphabet;
  EXPECT_THROW(extract_basic10(seq, 2, alphabet), std::out_of_range);
  EXPECT_THROW(extract_basic10(seq, -1, alphabet), std::out_of_range);
}

TEST(Basic10Test, Determinism) {
  EncodedSequence seq = encode(balloon_line(), Mode::S2S);
  FeatureAlphabet alphabet;
  FeatureVector a = extract_basic10(seq, 1, alphabet);
  FeatureVector b = extract_basic10(seq, 1, alphabet);
  EXPECT_EQ(a, b);
}

TEST(Basic10Test, IndicesStrictlyIncreasing) {
  Line line = annotated_jungle_line();
  EncodedSequence seq = encode(line, Mode::S2S);
  FeatureAlphabet alphabet;
  for (int pos = 0; pos < 3; ++pos) {
    FeatureVector fv = extract_full64(seq, pos, line, alphabet);
    for (size_t i = 1; i < fv.indices.size(); ++i)
      EXPECT_LT(fv.indices[i - 1], fv.indices[i]);
  }
}

// Hand enumeration of all 64 templates at position 1 ("jun") of the
// annotated "the jungle" fixture.
TEST(Full64Test, HandEnumeratedPositionOne) {
  Line line = annotated_jungle_line();
  EncodedSequence seq = encode(line, Mode::S2S);
  FeatureAlphabet alphabet;
  FeatureVector fv = extract_full64(seq, 1, line, alphabet);

  std::set<std::string> expected = {
      // basic
      "b01.o0=jun", "b02.o-1=the", "b03.o+1=gle", "b04.o-2=<BOS>", "b05.o+2=<EOS>",
      "b06.w0=jungle", "b07.piw=initial", "b08.wlen=2", "b09.osfx3=jun", "b10.opfx3=jun",
      // observation conjunctions
      "x.conj.o-2|o-1=<BOS>|the", "x.conj.o-2|o0=<BOS>|jun", "x.conj.o-2|o+1=<BOS>|gle",
      "x.conj.o-2|o+2=<BOS>|<EOS>", "x.conj.o-1|o0=the|jun", "x.conj.o-1|o+1=the|gle",
      "x.conj.o-1|o+2=the|<EOS>", "x.conj.o0|o+1=jun|gle", "x.conj.o0|o+2=jun|<EOS>",
      "x.conj.o+1|o+2=gle|<EOS>",
      "x.tri.o-2|o-1|o0=<BOS>|the|jun", "x.tri.o-1|o0|o+1=the|jun|gle",
      "x.tri.o0|o+1|o+2=jun|gle|<EOS>",
      // lexical stress window
      "x.ls-2=<BOS>", "x.ls-1=-", "x.ls0=+", "x.ls+1=-", "x.ls+2=<EOS>",
      "x.conj.ls-1|ls0=-|+", "x.conj.ls0|ls+1=+|-",
      // word context
      "x.w-2=<BOS>", "x.w-1=the", "x.w+1=<EOS>", "x.w+2=<EOS>",
      "x.conj.w-1|w0=the|jungle", "x.conj.w0|w+1=jungle|<EOS>",
      "x.wstress-1=-", "x.wstress0=+-", "x.wstress+1=<EOS>",
      // POS (pos+1 is out of range, hence absent)
      "x.pos-1=DT", "x.pos0=NN", "x.conj.pos0|w0=NN|jungle",
      // character n-grams
      "x.opfx1=j", "x.opfx2=ju", "x.opfx3=jun", "x.opfx4=jun",
      "x.osfx1=n", "x.osfx2=un", "x.osfx3=jun", "x.osfx4=jun",
      "x.wpfx1=j", "x.wpfx2=ju", "x.wsfx1=e", "x.wsfx2=le",
      // positional
      "x.wordinitial=y", "x.wordfinal=n", "x.dstart=1", "x.dend=1",
      "x.sylidx=0", "x.sylridx=1",
      // mixed conjunctions
      "x.conj.o0|piw=jun|initial", "x.conj.o0|w0=jun|jungle", "x.conj.ls0|o0=+|jun"};
  EXPECT_EQ(expected.size(), 63u);  // 64 templates, one (x.pos+1) absent here
  EXPECT_EQ(names_of(fv, alphabet), expected);
}

TEST(Full64Test, MissingPosJustOmitsPosFeatures) {
  Line line = balloon_line();  // no POS annotations
  EncodedSequence seq = encode(line, Mode::S2S);
  FeatureAlphabet alphabet;
  FeatureVector fv = extract_full64(seq, 0, line, alphabet);
  for (const std::string& name : names_of(fv, alphabet))
    EXPECT_EQ(name.rfind("x.pos", 0), std::string::npos) << name;
  EXPECT_GE(fv.indices.size(), 40u);
}

TEST(Full64Test, BasicSubsetOfFull) {
  Corpus corpus = generate_synthetic(MeterSpec{Foot::Trochee, 4}, 20, 0.0, 13);
  FeatureAlphabet alphabet;
  for (const Line& line : corpus.lines) {
    for (Mode mode : {Mode::S2S, Mode::S2S_WB, Mode::W2SP}) {
      EncodedSequence seq = encode(line, mode);
      for (int pos = 0; pos < static_cast<int>(seq.size()); ++pos) {
        FeatureVector basic = extract_basic10(seq, pos, alphabet);
        FeatureVector full = extract_full64(seq, pos, line, alphabet);
        EXPECT_TRUE(std::includes(full.indices.begin(), full.indices.end(),
                                  basic.indices.begin(), basic.indices.end()))
            << line.id << " pos " << pos;
      }
    }
  }
}

TEST(FeatureAlphabetTest, FrozenMapsUnseenToUnk) {
  FeatureAlphabet alphabet;
  uint32_t a = alphabet.lookup("first");
  EXPECT_EQ(a, 1u);  // 0 is reserved for UNK
  alphabet.freeze();
  size_t size = alphabet.size();
  EXPECT_EQ(alphabet.lookup("never-seen"), features::kUnkFeature);
  EXPECT_EQ(alphabet.size(), size);
  EXPECT_EQ(alphabet.lookup("first"), a);
  EXPECT_EQ(alphabet.lookup_or_unk("also-new"), features::kUnkFeature);
}

TEST(FeatureAlphabetTest, ExtractionAfterFreezeNeverGrows) {
  Line line = annotated_jungle_line();
  EncodedSequence seq = encode(line, Mode::S2S);
  FeatureAlphabet alphabet;
  extract_full64(seq, 0, line, alphabet);
  alphabet.freeze();
  size_t size = alphabet.size();
  for (int pos = 0; pos < 3; ++pos) extract_full64(seq, pos, line, alphabet);
  EXPECT_EQ(alphabet.size(), size);
}

TEST(FeatureAlphabetTest, RebuildRoundTrip) {
  FeatureAlphabet a;
  a.lookup("x");
  a.lookup("y");
  FeatureAlphabet b = features::FeatureAlphabet::from_names(a.names(), true);
  EXPECT_EQ(b.size(), a.size());
  EXPECT_EQ(b.lookup_or_unk("y"), a.lookup_or_unk("y"));
  EXPECT_TRUE(b.frozen());
}

}  // namespace
}  // namespace metron
