#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spark/datagen/sample.hpp"
#include "spark/model/spark_model.hpp"
#include "spark/numkit/adam.hpp"
#include "spark/numkit/init.hpp"
#include "spark/retrieval/store.hpp"

namespace spark::continual {

using model::Inference;
using model::SparkModel;
using numkit::ParameterStore;
using numkit::RealVec;
using numkit::Tape;
using numkit::Var;

struct ContinualConfig {
  double lambda_emb = 1.0;
  double lambda_logit = 0.5;
  double lambda_reg = 1.0;
  double replay_ratio = 0.5;  // replayed share of each batch
  std::size_t replay_capacity = 256;  // per technique

  void validate() const;
};

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  numkit::AdamConfig adam;
  std::uint64_t seed = 0;
};

// lambda_emb |h - h_t|^2 + lambda_logit (y - y_t)^2, on raw logits.
double distill_loss(std::span<const double> h, double logit, std::span<const double> h_teacher, double logit_teacher,
                    double lambda_emb, double lambda_logit);
Var distill_loss(Var h, Var logit, std::span<const double> h_teacher, double logit_teacher, double lambda_emb,
                 double lambda_logit);

// lambda_reg * sum over trainable entries of |theta - theta_prev|^2,
// summed in name order.
double ewc_loss(const ParameterStore& current, const ParameterStore& anchor, double lambda_reg);
// Adds d(ewc_loss)/d(theta) to the gradients of `current`.
void ewc_accumulate_grad(ParameterStore& current, const ParameterStore& anchor, double lambda_reg);

// Frozen copy of the parameters at the end of a phase.
class TeacherSnapshot {
 public:
  TeacherSnapshot(const SparkModel& model, const ParameterStore& params);

  Inference evaluate(const Sample& sample) const;
  const ParameterStore& params() const { return params_; }

 private:
  const SparkModel* model_;
  // Forward passes bind parameter spans, hence mutable; values never change.
  mutable ParameterStore params_;
};

// Reservoir of raw samples per technique (generator id).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 256, std::uint64_t seed = 0);

  void add(const Sample& sample);
  // n draws with replacement, uniform over every retained item.
  std::vector<Sample> sample(std::size_t n, std::uint64_t seed) const;

  std::size_t size() const;
  std::size_t size(const std::string& technique) const;
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size() == 0; }

 private:
  struct Reservoir {
    std::vector<Sample> items;
    std::uint64_t seen = 0;
  };
  std::size_t capacity_;
  numkit::Rng rng_;
  std::map<std::string, Reservoir> reservoirs_;
};

struct LossTerms {
  double bce = 0.0;
  double distill = 0.0;
  double ewc = 0.0;

  double total() const { return bce + distill + ewc; }
};

// Mean BCE + mean distillation over the batch + parameter anchor. Terms
// with a zero weight, or without a teacher, are skipped entirely. With
// accumulate set, gradients are added to `params`.
LossTerms total_loss(const SparkModel& model, ParameterStore& params, std::span<const Sample> batch,
                     const TeacherSnapshot* teacher, const ContinualConfig& config, bool accumulate);

struct EpochLog {
  std::uint32_t phase = 0;
  std::size_t epoch = 0;
  LossTerms mean;  // averaged over the epoch's batches
};

struct TrainOptions {
  std::uint32_t phase = 0;
  const TeacherSnapshot* teacher = nullptr;
  const ReplayBuffer* replay = nullptr;
  ContinualConfig continual{0.0, 0.0, 0.0, 0.0, 256};
  std::function<void(const EpochLog&)> on_epoch;
};

// Adam over `epochs` passes of `data` with fresh optimizer state. Batches
// mix current and replayed samples at the configured ratio once the
// buffer holds anything.
std::vector<EpochLog> train(const SparkModel& model, ParameterStore& params, const std::vector<Sample>& data,
                            const TrainConfig& train_config, const TrainOptions& options);

// Plain BCE training: `train` with no teacher and no replay.
std::vector<EpochLog> fine_tune(const SparkModel& model, ParameterStore& params, const std::vector<Sample>& data,
                                const TrainConfig& train_config, std::uint32_t phase = 0);

std::vector<Inference> embed_all(const SparkModel& model, ParameterStore& params, const std::vector<Sample>& samples);

void index_samples(retrieval::VectorStore& store, const std::vector<Inference>& embeddings,
                   const std::vector<Sample>& samples, std::uint32_t phase);

// Fraction of samples classified correctly, by retrieval vote or, with
// use_retrieval off, by the sign of the logit.
double accuracy(const std::vector<Inference>& embeddings, const std::vector<Sample>& samples,
                const retrieval::VectorStore* store, std::size_t k, bool use_retrieval);

struct EvalSet {
  std::string name;
  std::uint32_t phase = 0;  // phase whose technique this set covers
  std::vector<Sample> samples;
};

struct PhaseReport {
  std::uint32_t phase = 0;
  std::vector<std::pair<std::string, double>> accuracy;  // per eval set
  std::vector<EpochLog> epochs;
  std::size_t inserted = 0;

  double mean_accuracy() const;
};

struct PhaseData {
  std::uint32_t phase = 0;
  std::vector<Sample> train;
};

// Owns the live parameters, the teacher and the replay buffer across
// consecutive phases.
class ContinualLearner {
 public:
  ContinualLearner(const SparkModel& model, ParameterStore params, ContinualConfig config, TrainConfig train_config);

  PhaseReport run_phase(const PhaseData& data, retrieval::VectorStore& store, const std::vector<EvalSet>& evals);

  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const TeacherSnapshot* teacher() const { return teacher_ ? &*teacher_ : nullptr; }
  std::uint32_t next_phase() const { return next_phase_; }

  // Gives a callback every epoch of every phase.
  std::function<void(const EpochLog&)> on_epoch;

 private:
  const SparkModel* model_;
  ParameterStore params_;
  ContinualConfig config_;
  TrainConfig train_config_;
  ReplayBuffer buffer_;
  std::optional<TeacherSnapshot> teacher_;
  std::uint32_t next_phase_ = 0;
};

// Rows per eval set with one accuracy column per phase, then mAcc and
// forgetting rows. Forgetting at phase p averages, over sets of earlier
// phases q, the drop from their accuracy at the end of q.
std::string phase_csv(const std::vector<PhaseReport>& reports, const std::vector<EvalSet>& evals);

}  // namespace spark::continual
