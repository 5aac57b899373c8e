#include "spark/continual/continual.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "spark/error.hpp"
#include "spark/numkit/ops.hpp"

namespace spark::continual {

namespace ops = numkit::ops;
using numkit::mix_seed;

void ContinualConfig::validate() const {
  require(lambda_emb >= 0.0, ErrorKind::kConfig, "continual.lambda_emb must be >= 0");
  require(lambda_logit >= 0.0, ErrorKind::kConfig, "continual.lambda_logit must be >= 0");
  require(lambda_reg >= 0.0, ErrorKind::kConfig, "continual.lambda_reg must be >= 0");
  require(replay_ratio >= 0.0 && replay_ratio <= 1.0, ErrorKind::kConfig, "continual.replay_ratio must be in [0, 1]");
  require(replay_capacity > 0, ErrorKind::kConfig, "continual.replay_capacity must be positive");
}

double distill_loss(std::span<const double> h, double logit, std::span<const double> h_teacher, double logit_teacher,
                    double lambda_emb, double lambda_logit) {
  if (h.size() != h_teacher.size()) {
    fail(ErrorKind::kInvalidInput, "distill_loss: embedding lengths differ (" + std::to_string(h.size()) + " vs " +
                                       std::to_string(h_teacher.size()) + ")");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) sq += (h[i] - h_teacher[i]) * (h[i] - h_teacher[i]);
  const double dl = logit - logit_teacher;
  return lambda_emb * sq + lambda_logit * dl * dl;
}

Var distill_loss(Var h, Var logit, std::span<const double> h_teacher, double logit_teacher, double lambda_emb,
                 double lambda_logit) {
  if (h.size() != h_teacher.size()) {
    fail(ErrorKind::kInvalidInput, "distill_loss: embedding lengths differ (" + std::to_string(h.size()) + " vs " +
                                       std::to_string(h_teacher.size()) + ")");
  }
  Tape& tape = *h.tape;
  const Var emb = ops::scale(ops::squared_distance(h, tape.constant(RealVec(h_teacher.begin(), h_teacher.end()))),
                             lambda_emb);
  const Var lg = ops::scale(ops::squared_distance(logit, tape.constant(RealVec{logit_teacher})), lambda_logit);
  return ops::add(emb, lg);
}

double ewc_loss(const ParameterStore& current, const ParameterStore& anchor, double lambda_reg) {
  current.check_compatible(anchor);
  double total = 0.0;
  for (const auto& [name, e] : current) {
    if (!e.trainable) continue;
    const auto& prev = anchor.at(name).value;
    for (std::size_t i = 0; i < e.value.size(); ++i) total += (e.value[i] - prev[i]) * (e.value[i] - prev[i]);
  }
  return lambda_reg * total;
}

void ewc_accumulate_grad(ParameterStore& current, const ParameterStore& anchor, double lambda_reg) {
  current.check_compatible(anchor);
  for (auto& [name, e] : current) {
    if (!e.trainable) continue;
    const auto& prev = anchor.at(name).value;
    for (std::size_t i = 0; i < e.value.size(); ++i) e.grad[i] += 2.0 * lambda_reg * (e.value[i] - prev[i]);
  }
}

TeacherSnapshot::TeacherSnapshot(const SparkModel& model, const ParameterStore& params)
    : model_(&model), params_(params.snapshot()) {}

Inference TeacherSnapshot::evaluate(const Sample& sample) const { return model_->infer(params_, sample); }

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
  require(capacity > 0, ErrorKind::kConfig, "replay buffer capacity must be positive");
}

void ReplayBuffer::add(const Sample& sample) {
  Reservoir& r = reservoirs_[sample.generator_id];
  ++r.seen;
  if (r.items.size() < capacity_) {
    r.items.push_back(sample);
    return;
  }
  const std::uint64_t j = std::uniform_int_distribution<std::uint64_t>(0, r.seen - 1)(rng_);
  if (j < capacity_) r.items[j] = sample;
}

std::vector<Sample> ReplayBuffer::sample(std::size_t n, std::uint64_t seed) const {
  if (n == 0) return {};
  const std::size_t total = size();
  require(total > 0, ErrorKind::kInvalidInput, "replay_sample: buffer is empty");
  std::vector<const Sample*> flat;
  flat.reserve(total);
  for (const auto& [_, r] : reservoirs_) {
    for (const auto& s : r.items) flat.push_back(&s);
  }
  numkit::Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(*flat[pick(rng)]);
  return out;
}

std::size_t ReplayBuffer::size() const {
  std::size_t n = 0;
  for (const auto& [_, r] : reservoirs_) n += r.items.size();
  return n;
}

std::size_t ReplayBuffer::size(const std::string& technique) const {
  auto it = reservoirs_.find(technique);
  return it == reservoirs_.end() ? 0 : it->second.items.size();
}

LossTerms total_loss(const SparkModel& model, ParameterStore& params, std::span<const Sample> batch,
                     const TeacherSnapshot* teacher, const ContinualConfig& config, bool accumulate) {
  require(!batch.empty(), ErrorKind::kInvalidInput, "total_loss: empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  const bool distill = teacher != nullptr && (config.lambda_emb > 0.0 || config.lambda_logit > 0.0);
  LossTerms terms;
  for (const Sample& s : batch) {
    Tape tape(accumulate);
    const model::ForwardOutputs out = model.forward(tape, params, s);
    const Var bce = ops::bce_with_logits(out.logit, s.label);
    terms.bce += bce.scalar();
    Var loss = ops::scale(bce, inv);
    if (distill) {
      const Inference t = teacher->evaluate(s);
      const Var d = distill_loss(out.h_fused, out.logit, t.h_fused, t.logit, config.lambda_emb, config.lambda_logit);
      terms.distill += d.scalar();
      loss = ops::add(loss, ops::scale(d, inv));
    }
    if (!std::isfinite(loss.scalar())) fail(ErrorKind::kNumeric, "non-finite loss on sample '" + s.sample_id + "'");
    if (accumulate) tape.backward(loss);
  }
  terms.bce *= inv;
  terms.distill *= inv;
  if (teacher != nullptr && config.lambda_reg > 0.0) {
    terms.ewc = ewc_loss(params, teacher->params(), config.lambda_reg);
    if (accumulate) ewc_accumulate_grad(params, teacher->params(), config.lambda_reg);
  }
  return terms;
}

std::vector<EpochLog> train(const SparkModel& model, ParameterStore& params, const std::vector<Sample>& data,
                            const TrainConfig& train_config, const TrainOptions& options) {
  options.continual.validate();
  require(train_config.batch_size > 0, ErrorKind::kConfig, "optim.batch_size must be positive");
  std::size_t n_replay = 0;
  if (options.replay != nullptr && !options.replay->empty() && options.continual.replay_ratio > 0.0) {
    // At least one current sample per batch so every epoch terminates.
    n_replay = std::min<std::size_t>(
        static_cast<std::size_t>(std::lround(train_config.batch_size * options.continual.replay_ratio)),
        train_config.batch_size - 1);
  }
  if (train_config.batch_size == 1) n_replay = 0;
  const std::size_t n_current = train_config.batch_size - n_replay;
  const std::uint64_t phase_seed = mix_seed(train_config.seed, options.phase);

  numkit::Adam adam(train_config.adam);
  std::vector<EpochLog> logs;
  std::vector<std::size_t> order(data.size());
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < train_config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    numkit::Rng shuffle_rng(mix_seed(phase_seed, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochLog log{options.phase, epoch, {}};
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += n_current, ++step) {
      std::vector<Sample> batch;
      batch.reserve(train_config.batch_size);
      for (std::size_t i = start; i < std::min(order.size(), start + n_current); ++i) batch.push_back(data[order[i]]);
      if (n_replay > 0) {
        auto replayed = options.replay->sample(n_replay, mix_seed(phase_seed, 0x7e91a9ULL + step));
        std::move(replayed.begin(), replayed.end(), std::back_inserter(batch));
      }
      params.zero_grad();
      const LossTerms terms = total_loss(model, params, batch, options.teacher, options.continual, true);
      adam.step(params);
      log.mean.bce += terms.bce;
      log.mean.distill += terms.distill;
      log.mean.ewc += terms.ewc;
      ++batches;
    }
    if (batches > 0) {
      log.mean.bce /= batches;
      log.mean.distill /= batches;
      log.mean.ewc /= batches;
    }
    if (options.on_epoch) options.on_epoch(log);
    logs.push_back(log);
  }
  return logs;
}

std::vector<EpochLog> fine_tune(const SparkModel& model, ParameterStore& params, const std::vector<Sample>& data,
                                const TrainConfig& train_config, std::uint32_t phase) {
  TrainOptions options;
  options.phase = phase;
  return train(model, params, data, train_config, options);
}

std::vector<Inference> embed_all(const SparkModel& model, ParameterStore& params, const std::vector<Sample>& samples) {
  std::vector<Inference> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(model.infer(params, s));
  return out;
}

void index_samples(retrieval::VectorStore& store, const std::vector<Inference>& embeddings,
                   const std::vector<Sample>& samples, std::uint32_t phase) {
  require(embeddings.size() == samples.size(), ErrorKind::kInvalidInput, "index: embeddings and samples differ in count");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    store.insert(embeddings[i].h_fused, samples[i].label, samples[i].generator_id, phase);
  }
}

double accuracy(const std::vector<Inference>& embeddings, const std::vector<Sample>& samples,
                const retrieval::VectorStore* store, std::size_t k, bool use_retrieval) {
  require(!samples.empty() && embeddings.size() == samples.size(), ErrorKind::kInvalidInput,
          "accuracy: need one embedding per sample and at least one sample");
  require(!use_retrieval || store != nullptr, ErrorKind::kInvalidInput, "accuracy: retrieval needs a store");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int predicted = use_retrieval ? store->predict(embeddings[i].h_fused, k).label : (embeddings[i].logit > 0.0);
    correct += predicted == samples[i].label;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

double PhaseReport::mean_accuracy() const {
  if (accuracy.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [_, a] : accuracy) total += a;
  return total / static_cast<double>(accuracy.size());
}

ContinualLearner::ContinualLearner(const SparkModel& model, ParameterStore params, ContinualConfig config,
                                   TrainConfig train_config)
    : model_(&model),
      params_(std::move(params)),
      config_(config),
      train_config_(train_config),
      buffer_(config.replay_capacity, mix_seed(train_config.seed, 0xb0ffe7ULL)) {
  config_.validate();
}

PhaseReport ContinualLearner::run_phase(const PhaseData& data, retrieval::VectorStore& store,
                                        const std::vector<EvalSet>& evals) {
  if (data.phase != next_phase_) {
    fail(ErrorKind::kInvalidInput, "phase " + std::to_string(data.phase) + " out of order; expected phase " +
                                       std::to_string(next_phase_));
  }
  PhaseReport report;
  report.phase = data.phase;

  TrainOptions options;
  options.phase = data.phase;
  options.teacher = teacher();
  options.replay = &buffer_;
  options.continual = config_;
  options.on_epoch = on_epoch;
  report.epochs = train(*model_, params_, data.train, train_config_, options);

  for (const Sample& s : data.train) buffer_.add(s);
  teacher_.emplace(*model_, params_);

  const auto embeddings = embed_all(*model_, params_, data.train);
  index_samples(store, embeddings, data.train, data.phase);
  report.inserted = data.train.size();

  const bool use_retrieval = !model_->ablation().disable_retrieval;
  for (const EvalSet& ev : evals) {
    const auto emb = embed_all(*model_, params_, ev.samples);
    report.accuracy.emplace_back(ev.name, accuracy(emb, ev.samples, &store, model_->config().k_retrieve, use_retrieval));
  }
  ++next_phase_;
  return report;
}

std::string phase_csv(const std::vector<PhaseReport>& reports, const std::vector<EvalSet>& evals) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  out << "eval_set";
  for (const auto& r : reports) out << ",phase_" << r.phase;
  out << '\n';
  const auto acc = [&](const PhaseReport& r, const std::string& name) {
    for (const auto& [n, a] : r.accuracy) {
      if (n == name) return a;
    }
    fail(ErrorKind::kInvalidInput, "phase report lacks eval set '" + name + "'");
  };
  for (const EvalSet& ev : evals) {
    out << ev.name;
    for (const auto& r : reports) out << ',' << acc(r, ev.name);
    out << '\n';
  }
  out << "mAcc";
  for (const auto& r : reports) out << ',' << r.mean_accuracy();
  out << '\n';
  out << "forgetting";
  for (std::size_t p = 0; p < reports.size(); ++p) {
    out << ',';
    double drop = 0.0;
    std::size_t count = 0;
    for (const EvalSet& ev : evals) {
      if (ev.phase >= reports[p].phase) continue;
      for (const auto& r : reports) {
        if (r.phase == ev.phase) {
          drop += acc(r, ev.name) - acc(reports[p], ev.name);
          ++count;
        }
      }
    }
    if (count > 0) out << drop / static_cast<double>(count);
  }
  out << '\n';
  return out.str();
}

}  // namespace spark::continual
