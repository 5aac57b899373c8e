#include "spark/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "spark/error.hpp"

namespace spark::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const char* expected, const std::string& value) {
  fail(ErrorKind::kConfig, key + ": expected " + expected + ", got '" + value + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, const char* expected) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) bad_value(key, expected, value);
  return out;
}

template <typename T>
std::string format_number(T v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, "true or false", value);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, std::string>) {
      out += items[i];
    } else {
      out += format_number(items[i]);
    }
  }
  return out;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field unsigned_field(std::string key, T RunConfig::*group, std::size_t T::*member) {
  return {key,
          [key, group, member](RunConfig& c, const std::string& v) {
            c.*group.*member = parse_number<std::size_t>(key, v, "an unsigned integer");
          },
          [group, member](const RunConfig& c) { return format_number(c.*group.*member); }};
}

template <typename T>
Field int_field(std::string key, T RunConfig::*group, int T::*member) {
  return {key,
          [key, group, member](RunConfig& c, const std::string& v) {
            c.*group.*member = parse_number<int>(key, v, "an integer");
          },
          [group, member](const RunConfig& c) { return format_number(c.*group.*member); }};
}

template <typename T>
Field real_field(std::string key, T RunConfig::*group, double T::*member) {
  return {key,
          [key, group, member](RunConfig& c, const std::string& v) {
            c.*group.*member = parse_number<double>(key, v, "a number");
          },
          [group, member](const RunConfig& c) { return format_number(c.*group.*member); }};
}

Field bool_field(std::string key, bool spectral::Ablation::*member) {
  return {key, [key, member](RunConfig& c, const std::string& v) { c.ablation.*member = parse_bool(key, v); },
          [member](const RunConfig& c) { return std::string(c.ablation.*member ? "true" : "false"); }};
}

Field string_field(std::string key, std::string RunConfig::*member) {
  return {key, [member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }};
}

Field list_field(std::string key, std::vector<std::string> RunConfig::*member) {
  return {key, [member](RunConfig& c, const std::string& v) { c.*member = split_list(v); },
          [member](const RunConfig& c) { return join(c.*member); }};
}

const std::vector<Field>& fields() {
  using spectral::Ablation;
  using spectral::ModelConfig;
  using continual::ContinualConfig;
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(unsigned_field("model.d_model", &RunConfig::model, &ModelConfig::d_model));
    f.push_back(unsigned_field("model.n_experts", &RunConfig::model, &ModelConfig::n_experts));
    f.push_back(unsigned_field("model.n_heads", &RunConfig::model, &ModelConfig::n_heads));
    f.push_back(unsigned_field("model.blocks_per_path", &RunConfig::model, &ModelConfig::blocks_per_path));
    f.push_back(unsigned_field("model.image_size", &RunConfig::model, &ModelConfig::image_size));
    f.push_back(unsigned_field("model.channels", &RunConfig::model, &ModelConfig::channels));
    f.push_back(unsigned_field("model.patch_size", &RunConfig::model, &ModelConfig::patch_size));
    f.push_back(int_field("model.grid_size", &RunConfig::model, &ModelConfig::grid_size));
    f.push_back(int_field("model.spline_degree", &RunConfig::model, &ModelConfig::spline_degree));
    f.push_back(real_field("model.spline_span", &RunConfig::model, &ModelConfig::spline_span));
    f.push_back(real_field("model.residual_weight", &RunConfig::model, &ModelConfig::residual_weight));
    f.push_back(unsigned_field("model.proj_dim", &RunConfig::model, &ModelConfig::proj_dim));
    f.push_back(unsigned_field("model.k_retrieve", &RunConfig::model, &ModelConfig::k_retrieve));
    f.push_back(real_field("model.norm_eps", &RunConfig::model, &ModelConfig::norm_eps));
    f.push_back(string_field("model.semantic_embeddings", &RunConfig::semantic_embeddings));

    f.push_back(real_field("continual.lambda_emb", &RunConfig::continual, &ContinualConfig::lambda_emb));
    f.push_back(real_field("continual.lambda_logit", &RunConfig::continual, &ContinualConfig::lambda_logit));
    f.push_back(real_field("continual.lambda_reg", &RunConfig::continual, &ContinualConfig::lambda_reg));
    f.push_back(real_field("continual.replay_ratio", &RunConfig::continual, &ContinualConfig::replay_ratio));
    f.push_back(unsigned_field("continual.replay_capacity", &RunConfig::continual, &ContinualConfig::replay_capacity));

    f.push_back(unsigned_field("optim.epochs", &RunConfig::train, &continual::TrainConfig::epochs));
    f.push_back(unsigned_field("optim.batch_size", &RunConfig::train, &continual::TrainConfig::batch_size));
    const auto adam = [](std::string key, double numkit::AdamConfig::*member) {
      return Field{key,
                   [key, member](RunConfig& c, const std::string& v) {
                     c.train.adam.*member = parse_number<double>(key, v, "a number");
                   },
                   [member](const RunConfig& c) { return format_number(c.train.adam.*member); }};
    };
    f.push_back(adam("optim.lr", &numkit::AdamConfig::lr));
    f.push_back(adam("optim.beta1", &numkit::AdamConfig::beta1));
    f.push_back(adam("optim.beta2", &numkit::AdamConfig::beta2));
    f.push_back(adam("optim.eps", &numkit::AdamConfig::eps));

    f.push_back(string_field("data.train", &RunConfig::train_manifest));
    f.push_back(string_field("data.index", &RunConfig::index_manifest));
    f.push_back(list_field("data.eval", &RunConfig::eval_manifests));
    f.push_back({"data.eval_phases",
                 [](RunConfig& c, const std::string& v) {
                   c.eval_phases.clear();
                   for (const auto& item : split_list(v)) {
                     c.eval_phases.push_back(parse_number<std::uint32_t>("data.eval_phases", item, "phase indices"));
                   }
                 },
                 [](const RunConfig& c) { return join(c.eval_phases); }});
    f.push_back(list_field("data.phases", &RunConfig::phase_manifests));

    f.push_back({"run.seed",
                 [](RunConfig& c, const std::string& v) {
                   c.seed = parse_number<std::uint64_t>("run.seed", v, "an unsigned integer");
                 },
                 [](const RunConfig& c) { return format_number(c.seed); }});
    f.push_back(string_field("run.store", &RunConfig::store_path));
    f.push_back(string_field("run.checkpoint", &RunConfig::checkpoint_path));
    f.push_back(string_field("run.out", &RunConfig::out_path));
    f.push_back({"run.k_list",
                 [](RunConfig& c, const std::string& v) {
                   c.k_list.clear();
                   for (const auto& item : split_list(v)) {
                     c.k_list.push_back(parse_number<std::size_t>("run.k_list", item, "a list of positive integers"));
                   }
                 },
                 [](const RunConfig& c) { return join(c.k_list); }});
    f.push_back({"run.index_phase",
                 [](RunConfig& c, const std::string& v) {
                   c.index_phase = parse_number<std::uint32_t>("run.index_phase", v, "an unsigned integer");
                 },
                 [](const RunConfig& c) { return format_number(c.index_phase); }});

    f.push_back(bool_field("ablation.disable_pixel_fft", &Ablation::disable_pixel_fft));
    f.push_back(bool_field("ablation.disable_feature_fft", &Ablation::disable_feature_fft));
    f.push_back(bool_field("ablation.disable_retrieval", &Ablation::disable_retrieval));
    f.push_back(bool_field("ablation.use_mlp_instead_of_kan", &Ablation::use_mlp_instead_of_kan));
    return f;
  }();
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  continual.validate();
  const auto check = [](bool ok, const char* msg) { require(ok, ErrorKind::kConfig, msg); };
  check(train.batch_size >= 1, "optim.batch_size: must be >= 1");
  check(train.adam.lr > 0.0, "optim.lr: must be positive");
  check(train.adam.beta1 >= 0.0 && train.adam.beta1 < 1.0, "optim.beta1: must be in [0, 1)");
  check(train.adam.beta2 >= 0.0 && train.adam.beta2 < 1.0, "optim.beta2: must be in [0, 1)");
  check(train.adam.eps > 0.0, "optim.eps: must be positive");
  check(!k_list.empty(), "run.k_list: must not be empty");
  for (std::size_t k : k_list) check(k >= 1, "run.k_list: every k must be >= 1");
  check(eval_phases.empty() || eval_phases.size() == eval_manifests.size(),
        "data.eval_phases: needs one entry per data.eval manifest");
}

void RunConfig::set(const std::string& key, const std::string& value) { find_field(key).set(*this, trim(value)); }

std::string RunConfig::get(const std::string& key) const { return find_field(key).get(*this); }

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(*this) + "\n";
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::kConfig, "line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
    }
    config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const Error& e) {
    fail(e.kind(), path + ": " + e.what());
  }
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos, ErrorKind::kConfig, "--set expects key=value, got '" + assignment + "'");
  config.set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

}  // namespace spark::cli
