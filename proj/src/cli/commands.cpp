#include "spark/cli/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "spark/cli/checkpoint.hpp"
#include "spark/datagen/datagen.hpp"
#include "spark/error.hpp"
#include "spark/spectral/semantic.hpp"

namespace spark::cli {
namespace {

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorKind::kIo, "cannot open '" + path + "' for writing");
  f << text;
  f.close();
  require(!f.fail(), ErrorKind::kIo, "failed writing '" + path + "'");
}

const std::string& required(const std::string& value, const char* key, const char* command) {
  if (value.empty()) fail(ErrorKind::kConfig, std::string(key) + ": required by " + command);
  return value;
}

std::vector<Sample> load_samples(const RunConfig& config, const std::string& manifest) {
  return datagen::load_manifest(manifest, config.model.image_size, config.model.channels);
}

}  // namespace

std::string MetricsReport::accuracy_csv() const {
  std::string out = "eval_set";
  for (const auto& c : columns) out += "," + c;
  out += "\n";
  for (std::size_t s = 0; s < sets.size(); ++s) {
    out += sets[s];
    for (const auto& col : accuracy) out += "," + fixed6(col[s]);
    out += "\n";
  }
  out += "mAcc";
  for (double m : macc) out += "," + fixed6(m);
  out += "\n";
  return out;
}

std::string MetricsReport::loss_csv() const {
  std::string out = "epoch,bce\n0," + fixed6(initial_bce) + "\n";
  for (const auto& e : losses) out += std::to_string(e.epoch + 1) + "," + fixed6(e.mean.bce) + "\n";
  return out;
}

double mean_accuracy(const std::vector<double>& per_set) {
  require(!per_set.empty(), ErrorKind::kInvalidInput, "mean accuracy over no sets");
  double total = 0.0;
  for (double a : per_set) total += a;
  return total / static_cast<double>(per_set.size());
}

model::SparkModel build_model(const RunConfig& config) {
  config.validate();
  std::shared_ptr<const spectral::EmbeddingProvider> provider;
  if (!config.semantic_embeddings.empty()) {
    provider = std::make_shared<spectral::PrecomputedLoader>(config.semantic_embeddings, config.model.d_model);
  }
  return model::SparkModel(config.model, config.ablation, std::move(provider));
}

LoadedModel load_trained(const RunConfig& config) {
  LoadedModel loaded{std::make_unique<model::SparkModel>(build_model(config)), {}};
  const std::string& path = required(config.checkpoint_path, "run.checkpoint", "this command");
  const Checkpoint ck = load_checkpoint(path);
  loaded.params = loaded.model->make_parameters(config.seed);
  restore_parameters(loaded.params, ck.params, path);
  return loaded;
}

retrieval::VectorStore open_store(const RunConfig& config) {
  const std::string& path = required(config.store_path, "run.store", "this command");
  if (!std::filesystem::exists(path)) return retrieval::VectorStore(static_cast<std::uint32_t>(config.model.d_model));
  retrieval::VectorStore store = retrieval::VectorStore::load(path);
  if (store.dim() != config.model.d_model) {
    fail(ErrorKind::kConfig, "store '" + path + "' has dim " + std::to_string(store.dim()) +
                                 " but model.d_model is " + std::to_string(config.model.d_model));
  }
  return store;
}

std::string set_name(const std::string& manifest_path) {
  return std::filesystem::path(manifest_path).stem().string();
}

Sample load_input(const std::string& source, std::size_t image_size, std::size_t channels) {
  datagen::ManifestEntry entry{"input", source, 0, ""};
  if (source.rfind("SYNTH:", 0) == 0) {
    const std::string profile = source.substr(6, source.find(':', 6) - 6);
    entry.label = profile == "real" ? 0 : (datagen::find_profile(profile).artifact_strength > 0.0 ? 1 : 0);
    entry.generator_id = profile;
  }
  return datagen::load_sample(entry, "", image_size, channels);
}

MetricsReport cmd_train(const RunConfig& config, std::ostream& out) {
  const model::SparkModel model = build_model(config);
  const auto samples = load_samples(config, required(config.train_manifest, "data.train", "train"));
  numkit::ParameterStore params = model.make_parameters(config.seed);

  MetricsReport report;
  report.parameter_count = model.parameter_breakdown().total();
  if (!samples.empty()) {
    report.initial_bce = continual::total_loss(model, params, samples, nullptr, {0, 0, 0, 0, 1}, false).bce;
  }
  report.losses = continual::fine_tune(model, params, samples, config.train_config());

  save_checkpoint(required(config.checkpoint_path, "run.checkpoint", "train"), config.to_text(), params);
  if (!config.out_path.empty()) write_text(config.out_path, report.loss_csv());
  out << "trained on " << samples.size() << " samples, " << report.losses.size() << " epochs\n";
  out << report.loss_csv();
  out << "checkpoint written to " << config.checkpoint_path << "\n";
  return report;
}

std::size_t cmd_index(const RunConfig& config, std::ostream& out) {
  LoadedModel m = load_trained(config);
  const auto samples = load_samples(config, required(config.index_source(), "data.index", "index"));
  retrieval::VectorStore store = open_store(config);
  const std::size_t before = store.size();
  continual::index_samples(store, continual::embed_all(*m.model, m.params, samples), samples, config.index_phase);
  store.save(config.store_path);
  out << "indexed " << samples.size() << " samples; store " << config.store_path << " now holds " << store.size()
      << " (was " << before << ")\n";
  return samples.size();
}

InferResult cmd_infer(const RunConfig& config, const std::string& input, std::ostream& out) {
  require(!input.empty(), ErrorKind::kConfig, "infer: an input image or SYNTH:profile:seed source is required");
  LoadedModel m = load_trained(config);
  const Sample sample = load_input(input, config.model.image_size, config.model.channels);
  const model::Inference inf = m.model->infer(m.params, sample);

  InferResult result;
  result.logit = inf.logit;
  if (config.ablation.disable_retrieval) {
    result.used_retrieval = false;
    result.label = inf.logit > 0.0 ? 1 : 0;
    out << "label: " << (result.label ? "fake" : "real") << "\n";
    out << "logit: " << fixed6(inf.logit) << " (retrieval disabled)\n";
    return result;
  }

  if (!std::filesystem::exists(config.store_path)) {
    fail(ErrorKind::kEmptyStore, "store '" + config.store_path + "' does not exist; index first");
  }
  const retrieval::VectorStore store = open_store(config);
  if (store.size() == 0) fail(ErrorKind::kEmptyStore, "store '" + config.store_path + "' is empty; index first");
  const retrieval::Prediction p = store.predict(inf.h_fused, config.model.k_retrieve);
  result.label = p.label;
  result.neighbors = p.neighbors;
  std::size_t fake = 0;
  for (const auto& n : p.neighbors) fake += n.label == 1;
  out << "label: " << (p.label ? "fake" : "real") << "\n";
  out << "votes: real " << p.neighbors.size() - fake << ", fake " << fake << " (k=" << p.neighbors.size() << ")\n";
  out << "logit: " << fixed6(inf.logit) << "\n";
  out << "rank\tid\tsimilarity\tlabel\tgenerator_id\n";
  for (std::size_t i = 0; i < p.neighbors.size(); ++i) {
    const auto& n = p.neighbors[i];
    out << i + 1 << "\t" << n.id << "\t" << fixed6(n.similarity) << "\t" << (n.label ? "fake" : "real") << "\t"
        << n.generator_id << "\n";
  }
  return result;
}

MetricsReport cmd_eval(const RunConfig& config, std::ostream& out) {
  if (config.eval_manifests.empty()) fail(ErrorKind::kConfig, "data.eval: at least one eval manifest is required");
  LoadedModel m = load_trained(config);
  const bool use_retrieval = !config.ablation.disable_retrieval;

  std::optional<retrieval::VectorStore> store;
  if (use_retrieval) {
    store.emplace(open_store(config));
    if (store->size() == 0) fail(ErrorKind::kEmptyStore, "store '" + config.store_path + "' is empty; index first");
  }

  MetricsReport report;
  report.parameter_count = m.model->parameter_breakdown().total();
  if (use_retrieval) {
    for (std::size_t k : config.k_list) report.columns.push_back("k=" + std::to_string(k));
  } else {
    report.columns.push_back("logit");
  }
  report.accuracy.assign(report.columns.size(), {});
  for (const auto& path : config.eval_manifests) {
    const auto samples = load_samples(config, path);
    require(!samples.empty(), ErrorKind::kInvalidInput, "eval manifest '" + path + "' is empty");
    const auto embs = continual::embed_all(*m.model, m.params, samples);
    report.sets.push_back(set_name(path));
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
      const std::size_t k = use_retrieval ? config.k_list[c] : 1;
      report.accuracy[c].push_back(
          continual::accuracy(embs, samples, store ? &*store : nullptr, k, use_retrieval));
    }
  }
  for (const auto& col : report.accuracy) report.macc.push_back(mean_accuracy(col));

  const std::string csv = report.accuracy_csv();
  if (!config.out_path.empty()) write_text(config.out_path, csv);
  out << csv;
  return report;
}

IncrResult cmd_incr(const RunConfig& config, std::ostream& out) {
  if (config.phase_manifests.empty()) fail(ErrorKind::kConfig, "data.phases: at least one phase manifest is required");
  LoadedModel m = load_trained(config);
  retrieval::VectorStore store = open_store(config);

  std::vector<continual::EvalSet> evals;
  for (std::size_t i = 0; i < config.eval_manifests.size(); ++i) {
    const auto& path = config.eval_manifests[i];
    evals.push_back({set_name(path), config.eval_phases.empty() ? 0 : config.eval_phases[i], load_samples(config, path)});
  }

  continual::ContinualLearner learner(*m.model, std::move(m.params), config.continual, config.train_config());
  learner.on_epoch = [&](const continual::EpochLog& e) {
    out << "phase " << e.phase << " epoch " << e.epoch + 1 << " bce " << fixed6(e.mean.bce) << " distill "
        << fixed6(e.mean.distill) << " reg " << fixed6(e.mean.ewc) << "\n";
  };
  IncrResult result;
  for (std::size_t p = 0; p < config.phase_manifests.size(); ++p) {
    const continual::PhaseData data{static_cast<std::uint32_t>(p), load_samples(config, config.phase_manifests[p])};
    result.reports.push_back(learner.run_phase(data, store, evals));
  }
  store.save(config.store_path);
  result.csv = continual::phase_csv(result.reports, evals);
  if (!config.out_path.empty()) {
    write_text(config.out_path, result.csv);
    save_checkpoint(config.out_path + ".ckpt", config.to_text(), learner.params());
  }
  out << result.csv;
  return result;
}

model::ParameterBreakdown cmd_stats(const RunConfig& config, std::ostream& out) {
  const model::ParameterBreakdown b = build_model(config).parameter_breakdown();
  std::string csv = "module,parameters\n";
  for (const auto& [name, count] : b.modules) csv += name + "," + std::to_string(count) + "\n";
  csv += "trainable," + std::to_string(b.trainable) + "\n";
  csv += "frozen," + std::to_string(b.frozen) + "\n";
  csv += "total," + std::to_string(b.total()) + "\n";
  if (!config.out_path.empty()) write_text(config.out_path, csv);
  out << csv;
  return b;
}

std::size_t cmd_dump_embeddings(const RunConfig& config, std::ostream& out) {
  const std::string& path = required(config.out_path, "run.out", "dump-embeddings");
  LoadedModel m = load_trained(config);
  const auto samples = load_samples(config, required(config.index_source(), "data.index", "dump-embeddings"));
  const auto embs = continual::embed_all(*m.model, m.params, samples);

  spectral::EmbeddingFile file;
  file.d_model = static_cast<std::uint32_t>(config.model.d_model);
  std::string tsv = "sample_id\tlabel\tgenerator_id\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    file.records.emplace_back(samples[i].sample_id, retrieval::signature(embs[i].h_fused, file.d_model));
    tsv += samples[i].sample_id + "\t" + std::to_string(samples[i].label) + "\t" + samples[i].generator_id + "\n";
  }
  spectral::write_embedding_file(path, file);
  write_text(path + ".tsv", tsv);
  out << "wrote " << samples.size() << " embeddings to " << path << " and " << path << ".tsv\n";
  return samples.size();
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
    case ErrorKind::kCorruptStore:
      return 2;
    case ErrorKind::kNumeric:
      return 3;
    case ErrorKind::kInvalidInput:
    case ErrorKind::kConfig:
    case ErrorKind::kNotFound:
    case ErrorKind::kEmptyStore:
      return 1;
  }
  return 1;
}

}  // namespace spark::cli
