#include "spark/datagen/datagen.hpp"

#include <png.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "spark/error.hpp"
#include "spark/numkit/dft.hpp"
#include "spark/numkit/init.hpp"

namespace spark::datagen {

namespace {

using numkit::mix_seed;
using numkit::Rng;
constexpr double kPi = std::numbers::pi;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Unclipped real field so a zero-strength artifact reproduces gen_real exactly.
std::vector<double> real_field(std::uint64_t seed, std::size_t n, std::size_t channels) {
  require(n >= 4, ErrorKind::kInvalidInput, "image_size must be at least 4");
  require(channels == 1 || channels == 3, ErrorKind::kInvalidInput, "channels must be 1 or 3");
  Rng rng(mix_seed(seed, 0x5ea1));
  struct Wave {
    double fx, fy, phase, amp;
    double gain[3];
  };
  std::vector<double> base(channels);
  for (double& b : base) b = uniform(rng, 0.4, 0.6);
  std::vector<Wave> waves(4);
  for (Wave& w : waves) {
    const double freq = uniform(rng, 0.0, 0.15 * kPi);
    const double angle = uniform(rng, 0.0, 2.0 * kPi);
    w.fx = freq * std::cos(angle);
    w.fy = freq * std::sin(angle);
    w.phase = uniform(rng, 0.0, 2.0 * kPi);
    w.amp = uniform(rng, 0.02, 0.06);
    for (double& g : w.gain) g = uniform(rng, 0.7, 1.3);
  }
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> px(n * n * channels);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        double v = base[c];
        for (const Wave& w : waves) v += w.amp * w.gain[c] * std::cos(w.fx * x + w.fy * y + w.phase);
        px[(y * n + x) * channels + c] = v + noise(rng);
      }
    }
  }
  return px;
}

void clip(std::vector<double>& px) {
  for (double& v : px) v = std::clamp(v, 0.0, 1.0);
}

std::string source_label(const std::string& path) { return "'" + path + "'"; }

struct Decoded {
  std::size_t width = 0, height = 0, channels = 0;
  std::vector<std::uint8_t> data;
};

Decoded decode_png(const std::string& path, std::size_t channels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    fail(ErrorKind::kIo, "cannot decode image " + source_label(path) + ": " + image.message);
  }
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Decoded out;
  out.width = image.width;
  out.height = image.height;
  out.channels = channels;
  out.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorKind::kIo, "cannot decode image " + source_label(path) + ": " + msg);
  }
  return out;
}

Decoded decode_pnm(const std::string& path, const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  in >> magic;
  const std::size_t channels = magic == "P5" ? 1 : 3;
  std::size_t fields[3];
  for (std::size_t& f : fields) {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      in >> std::ws;
    }
    if (!(in >> f)) fail(ErrorKind::kIo, "cannot decode image " + source_label(path) + ": bad PNM header");
  }
  const auto [w, h, maxval] = fields;
  require(maxval > 0 && maxval <= 255, ErrorKind::kIo,
          "cannot decode image " + source_label(path) + ": only 8-bit PNM is supported");
  require(w > 0 && h > 0, ErrorKind::kIo, "cannot decode image " + source_label(path) + ": empty image");
  in.get();  // single whitespace before the raster
  Decoded out{w, h, channels, std::vector<std::uint8_t>(w * h * channels)};
  in.read(reinterpret_cast<char*>(out.data.data()), static_cast<std::streamsize>(out.data.size()));
  require(static_cast<std::size_t>(in.gcount()) == out.data.size(), ErrorKind::kIo,
          "cannot decode image " + source_label(path) + ": truncated raster");
  if (maxval != 255) {
    for (auto& v : out.data) v = static_cast<std::uint8_t>(std::lround(std::min<double>(v, maxval) * 255.0 / maxval));
  }
  return out;
}

}  // namespace

const std::vector<GeneratorProfile>& default_profiles() {
  static const std::vector<GeneratorProfile> profiles{
      {"pg", 3, 0.3, ArtifactKind::kCheckerboard, 101},
      {"cg", 2, 0.3, ArtifactKind::kPeriodicGrid, 102},
      {"ld", 3, 0.3, ArtifactKind::kBandNoise, 103},
      {"gl", 2, 0.3, ArtifactKind::kBandNoise, 104},
  };
  return profiles;
}

const GeneratorProfile& find_profile(const std::string& name) {
  for (const auto& p : default_profiles()) {
    if (p.name == name) return p;
  }
  fail(ErrorKind::kNotFound, "unknown generator profile '" + name + "'");
}

ArtifactKind parse_artifact_kind(const std::string& s) {
  if (s == "periodic-grid") return ArtifactKind::kPeriodicGrid;
  if (s == "band-noise") return ArtifactKind::kBandNoise;
  if (s == "checkerboard") return ArtifactKind::kCheckerboard;
  fail(ErrorKind::kConfig, "unknown artifact kind '" + s + "'");
}

std::string to_string(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::kPeriodicGrid: return "periodic-grid";
    case ArtifactKind::kBandNoise: return "band-noise";
    case ArtifactKind::kCheckerboard: return "checkerboard";
  }
  return "?";
}

Sample gen_real(std::uint64_t seed, std::size_t image_size, std::size_t channels) {
  Sample s;
  s.pixels = real_field(seed, image_size, channels);
  clip(s.pixels);
  s.label = 0;
  s.generator_id = "real";
  s.sample_id = "real:" + std::to_string(seed);
  return s;
}

Sample gen_fake(const GeneratorProfile& profile, std::uint64_t seed, std::size_t image_size, std::size_t channels) {
  require(profile.artifact_band >= 0 && profile.artifact_band <= 3, ErrorKind::kConfig,
          "profile '" + profile.name + "': artifact_band must be in 0..3");
  require(profile.artifact_strength >= 0.0, ErrorKind::kConfig,
          "profile '" + profile.name + "': artifact_strength must be non-negative");
  const std::size_t n = image_size;
  Sample s;
  s.pixels = real_field(seed, n, channels);
  Rng rng(mix_seed(mix_seed(seed, profile.seed), 0xa57));
  const double lo = profile.artifact_band * kPi / 4.0;
  const double a = profile.artifact_strength;
  // Periodic artifacts wander within the inner half of their band.
  const double centre = lo + kPi / 8.0 + uniform(rng, -kPi / 16.0, kPi / 16.0);

  std::vector<double> pattern(n * n, 0.0);
  switch (profile.artifact_kind) {
    case ArtifactKind::kCheckerboard: {
      const double px = uniform(rng, 0.0, 2.0 * kPi), py = uniform(rng, 0.0, 2.0 * kPi);
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) pattern[y * n + x] = a * std::cos(centre * x + px) * std::cos(centre * y + py);
      break;
    }
    case ArtifactKind::kPeriodicGrid: {
      const double px = uniform(rng, 0.0, 2.0 * kPi), py = uniform(rng, 0.0, 2.0 * kPi);
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x)
          pattern[y * n + x] = 0.5 * a * (std::cos(centre * x + px) + std::cos(centre * y + py));
      break;
    }
    case ArtifactKind::kBandNoise: {
      constexpr int kWaves = 8;
      const double amp = a / std::sqrt(2.0 * kWaves);
      for (int w = 0; w < kWaves; ++w) {
        const double fx = uniform(rng, lo, lo + kPi / 4.0);
        const double fy = uniform(rng, lo, lo + kPi / 4.0) * (rng() % 2 ? 1.0 : -1.0);
        const double ph = uniform(rng, 0.0, 2.0 * kPi);
        for (std::size_t y = 0; y < n; ++y)
          for (std::size_t x = 0; x < n; ++x) pattern[y * n + x] += amp * std::cos(fx * x + fy * y + ph);
      }
      break;
    }
  }
  for (std::size_t i = 0; i < n * n; ++i)
    for (std::size_t c = 0; c < channels; ++c) s.pixels[i * channels + c] += pattern[i];
  clip(s.pixels);
  s.label = profile.artifact_strength > 0.0 ? 1 : 0;
  s.generator_id = profile.name;
  s.sample_id = profile.name + ":" + std::to_string(seed);
  return s;
}

std::vector<double> resize_bilinear(const std::vector<double>& src, std::size_t in_h, std::size_t in_w,
                                    std::size_t channels, std::size_t out_h, std::size_t out_w) {
  require(src.size() == in_h * in_w * channels && in_h > 0 && in_w > 0, ErrorKind::kInvalidInput,
          "resize: source size does not match its shape");
  std::vector<double> out(out_h * out_w * channels);
  const auto coord = [](std::size_t i, std::size_t in, std::size_t out_n, std::size_t& i0, std::size_t& i1, double& t) {
    const double s = std::clamp((i + 0.5) * static_cast<double>(in) / out_n - 0.5, 0.0, static_cast<double>(in - 1));
    i0 = static_cast<std::size_t>(std::floor(s));
    i1 = std::min(i0 + 1, in - 1);
    t = s - i0;
  };
  for (std::size_t y = 0; y < out_h; ++y) {
    std::size_t y0, y1;
    double ty;
    coord(y, in_h, out_h, y0, y1, ty);
    for (std::size_t x = 0; x < out_w; ++x) {
      std::size_t x0, x1;
      double tx;
      coord(x, in_w, out_w, x0, x1, tx);
      for (std::size_t c = 0; c < channels; ++c) {
        const auto at = [&](std::size_t yy, std::size_t xx) { return src[(yy * in_w + xx) * channels + c]; };
        const double top = at(y0, x0) * (1 - tx) + at(y0, x1) * tx;
        const double bottom = at(y1, x0) * (1 - tx) + at(y1, x1) * tx;
        out[(y * out_w + x) * channels + c] = top * (1 - ty) + bottom * ty;
      }
    }
  }
  return out;
}

Sample ingest_image(const std::string& path, std::size_t image_size, std::size_t channels) {
  require(channels == 1 || channels == 3, ErrorKind::kInvalidInput, "channels must be 1 or 3");
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::kIo, "cannot open image " + source_label(path));
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  Decoded img;
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    img = decode_pnm(path, bytes);
  } else if (bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0) {
    img = decode_png(path, channels);
  } else {
    fail(ErrorKind::kIo, "cannot decode image " + source_label(path) + ": not a PNG, PGM or PPM file");
  }

  std::vector<double> px(img.width * img.height * channels);
  for (std::size_t i = 0; i < img.width * img.height; ++i) {
    const std::uint8_t* p = img.data.data() + i * img.channels;
    if (img.channels == channels) {
      for (std::size_t c = 0; c < channels; ++c) px[i * channels + c] = p[c] / 255.0;
    } else if (img.channels == 1) {
      for (std::size_t c = 0; c < channels; ++c) px[i * channels + c] = p[0] / 255.0;
    } else {
      px[i] = (0.2126 * p[0] + 0.7152 * p[1] + 0.0722 * p[2]) / 255.0;
    }
  }
  Sample s;
  s.pixels = resize_bilinear(px, img.height, img.width, channels, image_size, image_size);
  clip(s.pixels);
  s.sample_id = std::filesystem::path(path).filename().string();
  return s;
}

std::array<double, 4> band_energy(const Sample& sample, std::size_t n, std::size_t channels) {
  require(sample.pixels.size() == n * n * channels, ErrorKind::kInvalidInput, "band_energy: pixel count mismatch");
  std::array<double, 4> energy{};
  std::vector<std::complex<double>> line(n);
  for (std::size_t c = 0; c < channels; ++c) {
    for (int axis = 0; axis < 2; ++axis) {
      for (std::size_t r = 0; r < n; ++r) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t y = axis == 0 ? r : i, x = axis == 0 ? i : r;
          line[i] = sample.pixels[(y * n + x) * channels + c];
          mean += line[i].real();
        }
        mean /= n;
        for (auto& v : line) v -= mean;
        numkit::fft_inplace(line, false);
        for (std::size_t k = 1; k <= n / 2; ++k) {
          // omega_k = 2 pi k / n; band = floor(omega / (pi / 4))
          const int band = std::min<int>(3, static_cast<int>(8 * k / n));
          energy[band] += std::norm(line[k]) / (static_cast<double>(n) * n);
        }
      }
    }
  }
  for (double& e : energy) e /= 2.0 * n * channels;
  return energy;
}

double high_band_energy(const Sample& sample, std::size_t n, std::size_t channels) {
  require(sample.pixels.size() == n * n * channels, ErrorKind::kInvalidInput, "band_energy: pixel count mismatch");
  double energy = 0.0;
  std::vector<std::complex<double>> line(n);
  for (std::size_t c = 0; c < channels; ++c) {
    for (int axis = 0; axis < 2; ++axis) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t y = axis == 0 ? r : i, x = axis == 0 ? i : r;
          line[i] = sample.pixels[(y * n + x) * channels + c];
        }
        numkit::fft_inplace(line, false);
        // omega_k = 2 pi k / n > 0.75 pi  <=>  8k > 3n
        for (std::size_t k = 3 * n / 8 + 1; k <= n / 2; ++k) energy += std::norm(line[k]) / (static_cast<double>(n) * n);
      }
    }
  }
  return energy / (2.0 * n * channels);
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open manifest '" + path + "'");
  std::vector<ManifestEntry> entries;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
      fields.push_back(line.substr(start, tab - start));
    }
    fields.push_back(line.substr(start));
    const std::string where = path + ":" + std::to_string(lineno);
    require(fields.size() == 4, ErrorKind::kInvalidInput, where + ": expected 4 tab-separated fields");
    require(fields[2] == "0" || fields[2] == "1", ErrorKind::kInvalidInput, where + ": label must be 0 or 1");
    require(!fields[0].empty() && !fields[1].empty(), ErrorKind::kInvalidInput, where + ": empty sample id or source");
    entries.push_back({fields[0], fields[1], fields[2] == "1", fields[3]});
  }
  return entries;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write manifest '" + path + "'");
  for (const auto& e : entries) out << e.sample_id << '\t' << e.source << '\t' << e.label << '\t' << e.generator_id << '\n';
  if (!out) fail(ErrorKind::kIo, "cannot write manifest '" + path + "'");
}

Sample load_sample(const ManifestEntry& entry, const std::string& base_dir, std::size_t image_size,
                   std::size_t channels) {
  Sample s;
  if (entry.source.rfind("SYNTH:", 0) == 0) {
    const std::string rest = entry.source.substr(6);
    const auto colon = rest.find(':');
    require(colon != std::string::npos, ErrorKind::kInvalidInput, "bad synthetic source '" + entry.source + "'");
    const std::string profile = rest.substr(0, colon);
    const std::string seed_text = rest.substr(colon + 1);
    std::uint64_t seed = 0;
    const auto [end, ec] = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
    require(ec == std::errc() && end == seed_text.data() + seed_text.size(), ErrorKind::kInvalidInput,
            "bad seed in synthetic source '" + entry.source + "'");
    s = profile == "real" ? gen_real(seed, image_size, channels) : gen_fake(find_profile(profile), seed, image_size, channels);
    require(s.label == entry.label, ErrorKind::kInvalidInput,
            "sample '" + entry.sample_id + "': label " + std::to_string(entry.label) + " contradicts source " + entry.source);
  } else {
    std::filesystem::path p(entry.source);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    s = ingest_image(p.string(), image_size, channels);
    s.label = entry.label;
  }
  s.sample_id = entry.sample_id;
  s.generator_id = entry.generator_id;
  return s;
}

std::vector<Sample> load_manifest(const std::string& path, std::size_t image_size, std::size_t channels) {
  const auto entries = read_manifest(path);
  const std::string base = std::filesystem::path(path).parent_path().string();
  std::vector<Sample> samples;
  samples.reserve(entries.size());
  for (const auto& e : entries) samples.push_back(load_sample(e, base, image_size, channels));
  return samples;
}

std::vector<ManifestEntry> synthetic_entries(const std::string& profile, std::size_t count, std::uint64_t base_seed) {
  const int label = profile == "real" ? 0 : (find_profile(profile).artifact_strength > 0.0 ? 1 : 0);
  std::vector<ManifestEntry> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t seed = mix_seed(base_seed, i);
    out.push_back({profile + "-" + std::to_string(base_seed) + "-" + std::to_string(i),
                   "SYNTH:" + profile + ":" + std::to_string(seed), label, profile});
  }
  return out;
}

namespace {

void append(std::vector<ManifestEntry>& to, std::vector<ManifestEntry> from) {
  to.insert(to.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
}

// Half real, half `profile`, seeds base and base + 1.
std::vector<ManifestEntry> half_real(const std::string& profile, std::size_t n, std::uint64_t base) {
  auto out = synthetic_entries("real", n / 2, base);
  append(out, synthetic_entries(profile, n - n / 2, base + 1));
  return out;
}

}  // namespace

ToyBenchmark toy_benchmark(std::uint64_t seed, std::size_t n_train, std::size_t n_eval, std::size_t n_phase) {
  ToyBenchmark b;
  b.train = synthetic_entries("real", n_train / 2, seed * 10 + 1);
  append(b.train, synthetic_entries("pg", n_train / 4, seed * 10 + 2));
  append(b.train, synthetic_entries("cg", n_train - n_train / 2 - n_train / 4, seed * 10 + 3));
  for (const char* g : {"ld", "gl"}) {
    auto e = synthetic_entries("real", n_eval / 2, seed * 10 + (g[0] == 'g' ? 6 : 5));
    append(e, synthetic_entries(g, n_eval - n_eval / 2, seed * 10 + 7));
    b.eval.push_back({g, 0, std::move(e)});
  }
  b.phases.push_back({"phase0", 0, half_real("pg", n_phase, seed * 100 + 10)});
  b.phases.push_back({"phase1", 1, half_real("cg", n_phase, seed * 100 + 20)});
  b.phase_eval.push_back({"pg", 0, half_real("pg", n_eval, seed * 100 + 50)});
  b.phase_eval.push_back({"cg", 1, half_real("cg", n_eval, seed * 100 + 60)});
  return b;
}

}  // namespace spark::datagen
