#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "spark/cli/config.hpp"
#include "spark/continual/continual.hpp"
#include "spark/error.hpp"
#include "spark/model/spark_model.hpp"
#include "spark/retrieval/store.hpp"

namespace spark::cli {

// Accuracy table (one column per k, or a single logit column), loss
// curve and parameter count of one run.
struct MetricsReport {
  std::vector<std::string> sets;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> accuracy;  // [column][set]
  std::vector<double> macc;                   // per column
  double initial_bce = 0.0;
  std::vector<continual::EpochLog> losses;
  std::size_t parameter_count = 0;

  // Rows per set, then mAcc; six decimals.
  std::string accuracy_csv() const;
  // epoch,bce with epoch 0 holding the loss at initialization.
  std::string loss_csv() const;
};

// mAcc is the plain mean over sets.
double mean_accuracy(const std::vector<double>& per_set);

model::SparkModel build_model(const RunConfig& config);

// Model plus parameters restored from config.checkpoint_path.
struct LoadedModel {
  std::unique_ptr<model::SparkModel> model;
  numkit::ParameterStore params;
};
LoadedModel load_trained(const RunConfig& config);

// Opens config.store_path, or an empty store of dim d_model when the file
// does not exist yet.
retrieval::VectorStore open_store(const RunConfig& config);

// Eval set name: manifest file name without directory and extension.
std::string set_name(const std::string& manifest_path);

// A manifest source line (path or SYNTH:profile:seed) as a sample. For
// synthetic sources the label follows from the profile.
Sample load_input(const std::string& source, std::size_t image_size, std::size_t channels);

MetricsReport cmd_train(const RunConfig& config, std::ostream& out);
std::size_t cmd_index(const RunConfig& config, std::ostream& out);

struct InferResult {
  int label = 0;
  double logit = 0.0;
  bool used_retrieval = true;
  std::vector<retrieval::Neighbor> neighbors;
};
InferResult cmd_infer(const RunConfig& config, const std::string& input, std::ostream& out);

MetricsReport cmd_eval(const RunConfig& config, std::ostream& out);

struct IncrResult {
  std::vector<continual::PhaseReport> reports;
  std::string csv;
};
IncrResult cmd_incr(const RunConfig& config, std::ostream& out);

model::ParameterBreakdown cmd_stats(const RunConfig& config, std::ostream& out);

std::size_t cmd_dump_embeddings(const RunConfig& config, std::ostream& out);

// 0 ok, 1 usage or config, 2 IO or corrupt file, 3 numeric failure.
int exit_code(ErrorKind kind);

}  // namespace spark::cli
