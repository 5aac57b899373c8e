#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spark/cli/config.hpp"
#include "spark/datagen/datagen.hpp"
#include "spark/error.hpp"

// Writes the toy benchmark manifests and a matching config into one directory.
int main(int argc, char** argv) {
  CLI::App app("Write synthetic toy benchmark manifests and a config that uses them.");
  std::string dir = "toy";
  std::uint64_t seed = 1;
  std::size_t n_train = 2000;
  std::size_t n_eval = 250;
  std::size_t n_phase = 1000;
  app.add_option("--dir", dir, "output directory");
  app.add_option("--seed", seed, "benchmark and run seed");
  app.add_option("--train", n_train, "training samples");
  app.add_option("--eval", n_eval, "samples per eval set");
  app.add_option("--phase", n_phase, "training samples per continual phase");
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  namespace dg = spark::datagen;
  try {
    const dg::ToyBenchmark b = dg::toy_benchmark(seed, n_train, n_eval, n_phase);
    fs::create_directories(fs::path(dir) / "eval");
    fs::create_directories(fs::path(dir) / "phases");
    fs::create_directories(fs::path(dir) / "phase_eval");
    const auto at = [&](const std::string& rel) { return (fs::path(dir) / rel).string(); };

    spark::cli::RunConfig c;
    c.model.d_model = 64;
    c.model.n_heads = 4;
    c.model.proj_dim = 32;
    c.seed = seed;
    c.train_manifest = at("train.tsv");
    dg::write_manifest(c.train_manifest, b.train);
    for (const auto& m : b.eval) {
      c.eval_manifests.push_back(at("eval/" + m.name + ".tsv"));
      dg::write_manifest(c.eval_manifests.back(), m.entries);
    }
    for (const auto& m : b.phases) {
      c.phase_manifests.push_back(at("phases/" + m.name + ".tsv"));
      dg::write_manifest(c.phase_manifests.back(), m.entries);
    }
    for (const auto& m : b.phase_eval) dg::write_manifest(at("phase_eval/" + m.name + ".tsv"), m.entries);
    c.store_path = at("spark.store");
    c.checkpoint_path = at("spark.ckpt");

    std::ofstream conf(at("toy.conf"));
    conf << "# Toy benchmark run. For `incr`, point data.eval at the phase_eval\n"
         << "# manifests and set data.eval_phases = 0,1.\n"
         << c.to_text();
    if (!conf) spark::fail(spark::ErrorKind::kIo, "cannot write " + at("toy.conf"));
    std::cout << "wrote manifests and " << at("toy.conf") << "\n";
  } catch (const spark::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == spark::ErrorKind::kIo ? 2 : 1;
  }
  return 0;
}
