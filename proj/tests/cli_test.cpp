#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "spark/cli/checkpoint.hpp"
#include "spark/cli/commands.hpp"
#include "spark/cli/config.hpp"
#include "spark/datagen/datagen.hpp"
#include "spark/error.hpp"
#include "spark/io/binary.hpp"
#include "spark/spectral/semantic.hpp"
#include "support/small_config.hpp"

namespace spark::cli {
namespace {

namespace fs = std::filesystem;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kInvalidInput;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// Fresh directory per test with a small, fast config pointing into it.
class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("spark_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    config_.model = testing::small_config();
    config_.train.epochs = 2;
    config_.train.batch_size = 16;
    config_.seed = 7;
    config_.checkpoint_path = path("model.ckpt");
    config_.store_path = path("store.spkv");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Half real, half pg, written as a manifest.
  std::string manifest(const std::string& name, std::size_t n, std::uint64_t seed) {
    auto entries = datagen::synthetic_entries("real", n / 2, seed);
    const auto fakes = datagen::synthetic_entries("pg", n - n / 2, seed + 1);
    entries.insert(entries.end(), fakes.begin(), fakes.end());
    datagen::write_manifest(path(name), entries);
    return path(name);
  }

  fs::path dir_;
  RunConfig config_;
  std::ostringstream sink_;
};

TEST(RunConfig, TextRoundTripAndDefaults) {
  const RunConfig defaults;
  EXPECT_EQ(parse_config("").to_text(), defaults.to_text());
  EXPECT_EQ(parse_config(defaults.to_text()).to_text(), defaults.to_text());
  // Every key is printed, so every key has a default.
  const std::string text = defaults.to_text();
  for (const auto& key : config_keys()) EXPECT_NE(text.find(key + " = "), std::string::npos) << key;

  RunConfig c = parse_config(
      "# comment\n\nmodel.d_model = 64\nmodel.spline_span=0.1\nrun.k_list = 1, 5,20\n"
      "data.eval = a.tsv,b.tsv\nablation.disable_retrieval = true\nrun.seed = 18446744073709551615\n");
  EXPECT_EQ(c.model.d_model, 64u);
  EXPECT_EQ(c.model.spline_span, 0.1);
  EXPECT_EQ(c.k_list, (std::vector<std::size_t>{1, 5, 20}));
  EXPECT_EQ(c.eval_manifests, (std::vector<std::string>{"a.tsv", "b.tsv"}));
  EXPECT_TRUE(c.ablation.disable_retrieval);
  EXPECT_EQ(c.train_config().seed, 18446744073709551615ull);
  EXPECT_EQ(parse_config(c.to_text()).to_text(), c.to_text());
  // Shortest round-trip formatting keeps doubles exact.
  c.set("optim.lr", "0.1234567890123456789");
  EXPECT_EQ(parse_config(c.to_text()).train.adam.lr, 0.1234567890123456789);
}

TEST(RunConfig, FieldLevelErrors) {
  EXPECT_NE(message_of([] { parse_config("model.d_model = abc\n"); }).find("model.d_model"), std::string::npos);
  EXPECT_NE(message_of([] { parse_config("model.nope = 1\n"); }).find("model.nope"), std::string::npos);
  EXPECT_NE(message_of([] { parse_config("just words\n"); }).find("line 1"), std::string::npos);
  EXPECT_EQ(kind_of([] { parse_config("ablation.disable_retrieval = maybe\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { parse_config("model.d_model = -4\n"); }), ErrorKind::kConfig);

  RunConfig c;
  c.model.d_model = 30;
  EXPECT_NE(message_of([&] { c.validate(); }).find("model.d_model"), std::string::npos);
  c = RunConfig{};
  c.k_list = {3, 0};
  EXPECT_NE(message_of([&] { c.validate(); }).find("run.k_list"), std::string::npos);
  c = RunConfig{};
  c.continual.replay_ratio = 1.5;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::kConfig);
  c = RunConfig{};
  c.eval_manifests = {"a"};
  c.eval_phases = {0, 1};
  EXPECT_NE(message_of([&] { c.validate(); }).find("data.eval_phases"), std::string::npos);
}

TEST(RunConfig, Overrides) {
  RunConfig c = parse_config("model.d_model = 64\n");
  apply_override(c, "model.d_model=128");
  apply_override(c, " run.out = x.csv ");
  EXPECT_EQ(c.model.d_model, 128u);
  EXPECT_EQ(c.out_path, "x.csv");
  EXPECT_EQ(kind_of([&] { apply_override(c, "model.d_model"); }), ErrorKind::kConfig);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  const model::SparkModel m(testing::small_config(), {});
  const auto params = m.make_parameters(3);
  const auto bytes = encode_checkpoint("model.d_model = 32\n", params);
  const Checkpoint ck = decode_checkpoint(bytes);
  EXPECT_EQ(ck.config_text, "model.d_model = 32\n");
  EXPECT_EQ(encode_checkpoint(ck.config_text, ck.params), bytes);
  for (const auto& [name, e] : params) {
    EXPECT_EQ(ck.params.at(name).value, e.value) << name;
    EXPECT_EQ(ck.params.at(name).rows, e.rows);
    EXPECT_EQ(ck.params.at(name).cols, e.cols);
  }
  auto target = m.make_parameters(99);
  restore_parameters(target, ck.params, "mem");
  for (const auto& [name, e] : params) {
    EXPECT_EQ(target.at(name).value, e.value);
    EXPECT_EQ(target.at(name).trainable, e.trainable);
  }
}

TEST(Checkpoint, CorruptionIsDetected) {
  const model::SparkModel m(testing::small_config(), {});
  const auto bytes = encode_checkpoint("x = 1\n", m.make_parameters(3));
  for (std::size_t cut = 0; cut < bytes.size(); cut += 97) {
    const std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    try {
      decode_checkpoint(head);
      ADD_FAILURE() << "truncation at " << cut << " not detected";
    } catch (const CorruptStoreError& e) {
      EXPECT_LE(e.offset(), cut);
    }
  }
  auto flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x10;
  EXPECT_THROW(decode_checkpoint(flipped), CorruptStoreError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(magic), CorruptStoreError);
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_THROW(decode_checkpoint(extra), CorruptStoreError);
}

TEST(Checkpoint, ShapeMismatchIsAConfigError) {
  auto c = testing::small_config();
  const auto saved = model::SparkModel(c, {}).make_parameters(1);
  c.proj_dim *= 2;
  auto target = model::SparkModel(c, {}).make_parameters(1);
  EXPECT_EQ(kind_of([&] { restore_parameters(target, saved, "x"); }), ErrorKind::kConfig);
}

TEST_F(CliTest, TrainWithZeroEpochsWritesInitialization) {
  config_.train_manifest = manifest("train.tsv", 8, 1);
  config_.train.epochs = 0;
  cmd_train(config_, sink_);
  const Checkpoint ck = load_checkpoint(config_.checkpoint_path);
  const auto init = build_model(config_).make_parameters(config_.seed);
  for (const auto& [name, e] : init) EXPECT_EQ(ck.params.at(name).value, e.value) << name;
  EXPECT_EQ(parse_config(ck.config_text).to_text(), config_.to_text());
}

TEST_F(CliTest, TrainIsDeterministicAndDescends) {
  config_.train_manifest = manifest("train.tsv", 64, 1);
  config_.train.epochs = 10;
  const MetricsReport r = cmd_train(config_, sink_);
  const auto first = io::read_file(config_.checkpoint_path);
  ASSERT_EQ(r.losses.size(), 10u);
  EXPECT_LT(r.losses.back().mean.bce, r.initial_bce);
  cmd_train(config_, sink_);
  EXPECT_EQ(io::read_file(config_.checkpoint_path), first);
  EXPECT_EQ(r.loss_csv().rfind("epoch,bce\n0,", 0), 0u);
}

TEST_F(CliTest, TrainSurfacesManifestPath) {
  config_.train_manifest = path("missing.tsv");
  const std::string msg = message_of([&] { cmd_train(config_, sink_); });
  EXPECT_NE(msg.find("missing.tsv"), std::string::npos);
  EXPECT_EQ(exit_code(kind_of([&] { cmd_train(config_, sink_); })), 2);
}

TEST_F(CliTest, IndexCountsAndAppends) {
  config_.train_manifest = manifest("train.tsv", 8, 1);
  config_.train.epochs = 0;
  cmd_train(config_, sink_);

  config_.index_manifest = path("empty.tsv");
  datagen::write_manifest(config_.index_manifest, {});
  EXPECT_EQ(cmd_index(config_, sink_), 0u);
  EXPECT_EQ(retrieval::VectorStore::load(config_.store_path).size(), 0u);

  config_.index_manifest = manifest("index.tsv", 6, 5);
  EXPECT_EQ(cmd_index(config_, sink_), 6u);
  EXPECT_EQ(retrieval::VectorStore::load(config_.store_path).size(), 6u);
  cmd_index(config_, sink_);
  const auto store = retrieval::VectorStore::load(config_.store_path);
  ASSERT_EQ(store.size(), 12u);
  const auto recs = store.records();
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(recs[i].embedding, recs[i + 6].embedding);

  // A store of another width cannot take this model's embeddings.
  retrieval::VectorStore(8).save(path("narrow.spkv"));
  config_.store_path = path("narrow.spkv");
  EXPECT_EQ(kind_of([&] { cmd_index(config_, sink_); }), ErrorKind::kConfig);
}

TEST_F(CliTest, InferFindsItsOwnSampleAndFallsBackToLogit) {
  config_.train_manifest = manifest("train.tsv", 8, 1);
  config_.train.epochs = 1;
  cmd_train(config_, sink_);

  const std::string source = "SYNTH:pg:424242";
  config_.model.k_retrieve = 1;
  EXPECT_EQ(kind_of([&] { cmd_infer(config_, source, sink_); }), ErrorKind::kEmptyStore);
  const std::string msg = message_of([&] { cmd_infer(config_, source, sink_); });
  EXPECT_NE(msg.find("index first"), std::string::npos);

  datagen::write_manifest(path("one.tsv"), {{"probe", source, 1, "pg"}});
  config_.index_manifest = path("one.tsv");
  cmd_index(config_, sink_);
  config_.index_manifest = manifest("others.tsv", 8, 30);
  config_.index_phase = 1;
  cmd_index(config_, sink_);

  std::ostringstream a, b;
  const InferResult r = cmd_infer(config_, source, a);
  ASSERT_EQ(r.neighbors.size(), 1u);
  EXPECT_EQ(r.neighbors[0].id, 0u);
  EXPECT_NEAR(r.neighbors[0].similarity, 1.0, 1e-6);
  EXPECT_EQ(r.label, 1);
  cmd_infer(config_, source, b);
  EXPECT_EQ(a.str(), b.str());

  config_.ablation.disable_retrieval = true;
  const InferResult logit_only = cmd_infer(config_, source, sink_);
  EXPECT_FALSE(logit_only.used_retrieval);
  EXPECT_EQ(logit_only.label, logit_only.logit > 0.0 ? 1 : 0);
  EXPECT_TRUE(logit_only.neighbors.empty());
}

TEST_F(CliTest, EvalSelfRetrievalAndMeanAccuracy) {
  config_.train_manifest = manifest("train.tsv", 12, 1);
  config_.train.epochs = 1;
  cmd_train(config_, sink_);
  cmd_index(config_, sink_);

  config_.eval_manifests = {config_.train_manifest};
  config_.k_list = {1};
  const MetricsReport self = cmd_eval(config_, sink_);
  EXPECT_EQ(self.accuracy[0][0], 1.0);
  EXPECT_EQ(self.macc[0], self.accuracy[0][0]);

  config_.eval_manifests = {manifest("a.tsv", 10, 50), manifest("b.tsv", 6, 60)};
  config_.k_list = {1, 3, 5};
  config_.out_path = path("eval.csv");
  const MetricsReport r = cmd_eval(config_, sink_);
  EXPECT_EQ(r.sets, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(r.columns, (std::vector<std::string>{"k=1", "k=3", "k=5"}));
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(r.macc[c], (r.accuracy[c][0] + r.accuracy[c][1]) / 2, 1e-15);
  const auto csv = io::read_file(config_.out_path);
  EXPECT_EQ(std::string(csv.begin(), csv.end()), r.accuracy_csv());

  config_.ablation.disable_retrieval = true;
  fs::remove(config_.store_path);  // the logit fallback needs no store
  const MetricsReport logit = cmd_eval(config_, sink_);
  EXPECT_EQ(logit.columns, (std::vector<std::string>{"logit"}));
}

TEST(MetricsReport, CsvLayout) {
  MetricsReport r;
  r.sets = {"ld", "gl"};
  r.columns = {"k=1", "k=5"};
  r.accuracy = {{1.0, 0.5}, {0.75, 0.25}};
  r.macc = {mean_accuracy(r.accuracy[0]), mean_accuracy(r.accuracy[1])};
  EXPECT_EQ(r.accuracy_csv(),
            "eval_set,k=1,k=5\nld,1.000000,0.750000\ngl,0.500000,0.250000\nmAcc,0.750000,0.500000\n");
}

TEST_F(CliTest, SinglePhaseIncrMatchesTrainThenIndex) {
  const std::string data = manifest("phase0.tsv", 24, 1);
  // Initialization checkpoint, then one continual phase from it.
  config_.train_manifest = data;
  config_.train.epochs = 0;
  cmd_train(config_, sink_);
  RunConfig incr = config_;
  incr.train.epochs = 3;
  incr.phase_manifests = {data};
  incr.store_path = path("incr.spkv");
  incr.out_path = path("forget.csv");
  cmd_incr(incr, sink_);

  RunConfig plain = config_;
  plain.train.epochs = 3;
  plain.checkpoint_path = path("plain.ckpt");
  plain.store_path = path("plain.spkv");
  cmd_train(plain, sink_);
  cmd_index(plain, sink_);

  const Checkpoint a = load_checkpoint(path("forget.csv.ckpt"));
  const Checkpoint b = load_checkpoint(plain.checkpoint_path);
  for (const auto& [name, e] : b.params) EXPECT_EQ(a.params.at(name).value, e.value) << name;
  EXPECT_EQ(io::read_file(incr.store_path), io::read_file(plain.store_path));
}

TEST_F(CliTest, TwoPhaseIncrForgettingMatrixShape) {
  config_.train_manifest = manifest("init.tsv", 4, 1);
  config_.train.epochs = 0;
  cmd_train(config_, sink_);
  config_.train.epochs = 1;
  config_.phase_manifests = {manifest("p0.tsv", 8, 10), manifest("p1.tsv", 8, 20)};
  config_.eval_manifests = {manifest("e0.tsv", 6, 50), manifest("e1.tsv", 6, 60)};
  config_.eval_phases = {0, 1};
  const IncrResult r = cmd_incr(config_, sink_);
  ASSERT_EQ(r.reports.size(), 2u);
  for (const auto& rep : r.reports) EXPECT_EQ(rep.accuracy.size(), 2u);
  std::istringstream lines(r.csv);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 5u);  // header, 2 sets, mAcc, forgetting
  EXPECT_EQ(rows[0], "eval_set,phase_0,phase_1");
  EXPECT_EQ(rows[1].rfind("e0,", 0), 0u);
  EXPECT_EQ(rows[2].rfind("e1,", 0), 0u);
  EXPECT_EQ(retrieval::VectorStore::load(config_.store_path).size(), 16u);
}

TEST(Stats, MatchesHandCountAndInstantiation) {
  RunConfig c;
  c.model.d_model = 8;
  c.model.n_experts = 1;
  c.model.grid_size = 3;
  c.model.n_heads = 1;
  c.model.image_size = 4;
  c.model.patch_size = 4;
  c.model.proj_dim = 4;
  std::ostringstream out;
  const auto b = cmd_stats(c, out);
  // Same hand count as the model breakdown test.
  EXPECT_EQ(b.total(), 2001u);
  EXPECT_NE(out.str().find("total,2001\n"), std::string::npos);
  EXPECT_EQ(b.total(), build_model(c).make_parameters(0).parameter_count());

  c.model = testing::small_config();
  for (int mask = 0; mask < 16; ++mask) {
    c.ablation = {(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0, (mask & 8) != 0};
    EXPECT_EQ(cmd_stats(c, out).total(), build_model(c).make_parameters(0).parameter_count()) << mask;
  }
}

TEST_F(CliTest, DumpEmbeddingsMatchesStore) {
  config_.train_manifest = manifest("train.tsv", 8, 1);
  config_.train.epochs = 1;
  cmd_train(config_, sink_);

  config_.index_manifest = path("empty.tsv");
  datagen::write_manifest(config_.index_manifest, {});
  config_.out_path = path("empty.spke");
  EXPECT_EQ(cmd_dump_embeddings(config_, sink_), 0u);
  EXPECT_EQ(io::read_file(config_.out_path).size(), 4u + 4 + 4 + 8);
  EXPECT_EQ(spectral::read_embedding_file(config_.out_path).records.size(), 0u);

  config_.index_manifest = manifest("index.tsv", 10, 9);
  config_.out_path = path("emb.spke");
  EXPECT_EQ(cmd_dump_embeddings(config_, sink_), 10u);
  cmd_index(config_, sink_);
  const auto file = spectral::read_embedding_file(config_.out_path);
  const auto recs = retrieval::VectorStore::load(config_.store_path).records();
  const auto entries = datagen::read_manifest(config_.index_manifest);
  ASSERT_EQ(file.records.size(), 10u);
  EXPECT_EQ(file.d_model, config_.model.d_model);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(file.records[i].first, entries[i].sample_id);
    EXPECT_EQ(file.records[i].second.size(), config_.model.d_model);
    EXPECT_EQ(file.records[i].second, recs[i].embedding);
  }
  const auto tsv = io::read_file(config_.out_path + ".tsv");
  const std::string text(tsv.begin(), tsv.end());
  EXPECT_EQ(text.rfind("sample_id\tlabel\tgenerator_id\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 11);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code(ErrorKind::kConfig), 1);
  EXPECT_EQ(exit_code(ErrorKind::kInvalidInput), 1);
  EXPECT_EQ(exit_code(ErrorKind::kEmptyStore), 1);
  EXPECT_EQ(exit_code(ErrorKind::kIo), 2);
  EXPECT_EQ(exit_code(ErrorKind::kCorruptStore), 2);
  EXPECT_EQ(exit_code(ErrorKind::kNumeric), 3);
}

}  // namespace
}  // namespace spark::cli
