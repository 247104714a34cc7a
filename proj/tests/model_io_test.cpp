// Round-trip and error-path tests for the unified model file format.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "metron/synthetic.hpp"
#include "metron/tagger.hpp"

namespace metron {
namespace {

namespace fs = std::filesystem;

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / ("metron-io-" + name)).string();
}

RunConfig config_for(Family family) {
  RunConfig cfg;
  cfg.family = family;
  cfg.feature_set = features::FeatureSet::Basic10;
  cfg.perceptron_cfg.epochs = 3;
  cfg.crf_cfg.epochs = 8;
  cfg.neural_cfg = {.char_dim = 4,
                    .char_hidden = 4,
                    .token_dim = 5,
                    .token_hidden = 5,
                    .dropout = 0.5,
                    .lr = 0.1,
                    .grad_clip = 5.0,
                    .epochs = 4,
                    .batch_size = 1,
                    .seed = 1,
                    .pretrained_embeddings = ""};
  return cfg;
}

TEST(ModelIoTest, EveryFamilyRoundTripsPredictions) {
  Corpus corpus = generate_synthetic(MeterSpec{Foot::Iamb, 5}, 30, 0.0, 14);
  for (Family family : {Family::Perceptron, Family::Hmm, Family::Crf, Family::BilstmCrf}) {
    TrainedTagger trained = train_tagger(corpus.lines, corpus.language, config_for(family));
    std::string path = temp_path(std::string(family_name(family)) + ".json");
    save_tagger(trained, path);
    TrainedTagger loaded = load_tagger(path);

    EXPECT_EQ(loaded.family, family);
    EXPECT_EQ(loaded.mode, Mode::S2S);
    EXPECT_EQ(loaded.label_alphabet(), trained.label_alphabet());
    for (const Line& line : corpus.lines)
      EXPECT_EQ(loaded.predict_stress(line), trained.predict_stress(line))
          << family_name(family) << " line " << line.id;
    fs::remove(path);
  }
}

TEST(ModelIoTest, SavedFileIsDeterministic) {
  Corpus corpus = generate_synthetic(MeterSpec{Foot::Trochee, 3}, 15, 0.0, 3);
  TrainedTagger t1 = train_tagger(corpus.lines, corpus.language, config_for(Family::Hmm));
  TrainedTagger t2 = train_tagger(corpus.lines, corpus.language, config_for(Family::Hmm));
  std::string p1 = temp_path("det1.json"), p2 = temp_path("det2.json");
  save_tagger(t1, p1);
  save_tagger(t2, p2);
  std::ifstream a(p1), b(p2);
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  EXPECT_EQ(sa, sb);
  fs::remove(p1);
  fs::remove(p2);
}

TEST(ModelIoTest, UnknownFamilyFailsLoudly) {
  std::string path = temp_path("badfam.json");
  std::ofstream(path) << R"({"format_version":1,"family":"transformer","language":"en",)"
                      << R"("mode":"s2s","word_boundaries":false,"label_alphabet":[],"payload":{}})";
  EXPECT_THROW(load_tagger(path), std::invalid_argument);
  fs::remove(path);
}

TEST(ModelIoTest, WrongFormatVersionRejected) {
  std::string path = temp_path("badver.json");
  std::ofstream(path) << R"({"format_version":99,"family":"hmm","language":"en",)"
                      << R"("mode":"s2s","word_boundaries":false,"label_alphabet":[],"payload":{}})";
  EXPECT_THROW(load_tagger(path), std::runtime_error);
  fs::remove(path);
}

TEST(ModelIoTest, MalformedJsonRejected) {
  std::string path = temp_path("notjson.json");
  std::ofstream(path) << "this is not json";
  EXPECT_THROW(load_tagger(path), std::runtime_error);
  fs::remove(path);
}

TEST(ModelIoTest, FamilyPayloadMismatchFailsLoudly) {
  // a valid envelope whose payload belongs to a different family must not
  // silently misparse
  Corpus corpus = generate_synthetic(MeterSpec{Foot::Iamb, 3}, 12, 0.0, 5);
  TrainedTagger hmm_tagger = train_tagger(corpus.lines, corpus.language, config_for(Family::Hmm));
  std::string path = temp_path("mismatch.json");
  save_tagger(hmm_tagger, path);

  // rewrite the family field to crf, keeping the hmm payload
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  size_t at = text.find("\"hmm\"");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 5, "\"crf\"");
  std::ofstream(path) << text;

  EXPECT_THROW(load_tagger(path), std::exception);
  fs::remove(path);
}

TEST(ModelIoTest, MissingFileIsAnError) {
  EXPECT_THROW(load_tagger("/no/such/model.json"), std::runtime_error);
}

TEST(ModelIoTest, CrfParamCountValidated) {
  Corpus corpus = generate_synthetic(MeterSpec{Foot::Iamb, 3}, 12, 0.0, 5);
  TrainedTagger tagger = train_tagger(corpus.lines, corpus.language, config_for(Family::Crf));
  std::string path = temp_path("crfcut.json");
  save_tagger(tagger, path);
  std::ifstream in(path);
  nlohmann::json j;
  in >> j;
  in.close();
  j["payload"]["params"].erase(0);  // drop one parameter
  std::ofstream(path) << j.dump();
  EXPECT_THROW(load_tagger(path), std::runtime_error);
  fs::remove(path);
}

}  // namespace
}  // namespace metron
