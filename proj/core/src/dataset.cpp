// Copyright 2026 The AirFEEL Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "airfeel/dataset.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "airfeel/error.hpp"

namespace airfeel::data {

void SyntheticTaskSpec::validate() const {
  if (class_count < 2) throw std::invalid_argument("SyntheticTaskSpec: class_count must be >= 2");
  if (feature_dim < 1) throw std::invalid_argument("SyntheticTaskSpec: feature_dim must be >= 1");
  if (!(noise_std > 0.0)) throw std::invalid_argument("SyntheticTaskSpec: noise_std must be positive");
  if (!(label_noise_prob >= 0.0 && label_noise_prob < 1.0)) {
    throw std::invalid_argument("SyntheticTaskSpec: label_noise_prob must lie in [0, 1)");
  }
  if (class_means.size() != class_count) throw std::invalid_argument("SyntheticTaskSpec: need one mean per class");
  for (const auto& m : class_means) {
    if (m.size() != feature_dim) throw std::invalid_argument("SyntheticTaskSpec: class mean has wrong dimension");
  }
  for (std::size_t a = 0; a < class_count; ++a) {
    for (std::size_t b = a + 1; b < class_count; ++b) {
      if (class_means[a] == class_means[b]) throw std::invalid_argument("SyntheticTaskSpec: class means must differ");
    }
  }
}

SyntheticTaskSpec make_task(std::size_t class_count, std::size_t feature_dim, double noise_std,
                            double label_noise_prob, std::uint64_t seed, double min_separation) {
  Rng rng(seed, StreamPurpose::task);
  SyntheticTaskSpec spec;
  spec.class_count = class_count;
  spec.feature_dim = feature_dim;
  spec.noise_std = noise_std;
  spec.label_noise_prob = label_noise_prob;
  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; spec.class_means.size() < class_count; ++attempt) {
    if (attempt == kMaxAttempts) throw std::invalid_argument("make_task: cannot place separated class means");
    std::vector<double> m(feature_dim);
    double sq = 0.0;
    for (double& v : m) {
      v = rng.normal();
      sq += v * v;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : m) v *= inv;
    bool separated = true;
    for (const auto& other : spec.class_means) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < feature_dim; ++j) d2 += (m[j] - other[j]) * (m[j] - other[j]);
      if (std::sqrt(d2) < min_separation) {
        separated = false;
        break;
      }
    }
    if (separated) spec.class_means.push_back(std::move(m));
  }
  spec.validate();
  return spec;
}

SyntheticTaskSpec default_task(std::uint64_t seed) { return make_task(5, 16, 0.6, 0.0, seed); }

Sample draw_synthetic(const SyntheticTaskSpec& spec, Rng& rng) {
  Sample s;
  const std::size_t cls = rng.index(spec.class_count);
  const auto& mean = spec.class_means[cls];
  s.features.resize(spec.feature_dim);
  for (std::size_t j = 0; j < spec.feature_dim; ++j) s.features[j] = mean[j] + spec.noise_std * rng.normal();
  s.label = cls;
  if (spec.label_noise_prob > 0.0 && rng.uniform() < spec.label_noise_prob) {
    const std::size_t shift = 1 + rng.index(spec.class_count - 1);
    s.label = (cls + shift) % spec.class_count;
  }
  return s;
}

SampleSource SampleSource::synthetic(std::shared_ptr<const SyntheticTaskSpec> spec) {
  if (!spec) throw std::invalid_argument("SampleSource: null task spec");
  spec->validate();
  SampleSource src;
  src.spec_ = std::move(spec);
  return src;
}

SampleSource SampleSource::pool(std::shared_ptr<const std::vector<Sample>> samples, PoolMode mode) {
  if (!samples) throw std::invalid_argument("SampleSource: null pool");
  SampleSource src;
  src.pool_ = std::move(samples);
  src.mode_ = mode;
  return src;
}

SampleStream::SampleStream(SampleSource source, Rng rng) : source_(std::move(source)), rng_(std::move(rng)) {}

SampleStream SampleStream::for_round(const SampleSource& source, std::uint64_t seed, std::uint64_t repeat,
                                     std::uint64_t device, std::uint64_t round) {
  return SampleStream(source, Rng(seed, StreamPurpose::train, repeat, device, round));
}

Sample SampleStream::next() {
  if (source_.is_synthetic()) {
    ++drawn_;
    return draw_synthetic(*source_.spec(), rng_);
  }
  const auto& pool = *source_.samples();
  if (source_.mode() == SampleSource::PoolMode::sequential) {
    if (drawn_ >= pool.size()) throw DataError("sample source exhausted after " + std::to_string(drawn_) + " samples");
    return pool[drawn_++];
  }
  if (pool.empty()) throw DataError("sample source exhausted: empty pool");
  ++drawn_;
  return pool[rng_.index(pool.size())];
}

std::vector<Sample> SampleStream::draw(std::size_t n) {
  if (n == 0) throw std::invalid_argument("SampleStream::draw: n must be >= 1");
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(next());
  return out;
}

std::vector<Sample> holdout(const SyntheticTaskSpec& spec, std::size_t n, std::uint64_t seed) {
  Rng rng(seed, StreamPurpose::holdout);
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw_synthetic(spec, rng));
  return out;
}

std::vector<Sample> materialize_pool(const SyntheticTaskSpec& spec, std::size_t n, std::uint64_t seed,
                                     std::uint64_t repeat, std::uint64_t device) {
  Rng rng(seed, StreamPurpose::pool, repeat, device);
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw_synthetic(spec, rng));
  return out;
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw DataError(what + ": truncated header");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::vector<unsigned char> read_payload(std::istream& in, std::size_t bytes, const std::string& what) {
  std::vector<unsigned char> buf(bytes);
  if (bytes > 0 && !in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes))) {
    throw DataError(what + ": truncated payload, header promises " + std::to_string(bytes) + " bytes");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError(what + ": payload longer than header count");
  return buf;
}

}  // namespace

std::vector<Sample> load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw DataError("cannot open " + images_path.string());
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw DataError("cannot open " + labels_path.string());

  const std::string img_name = images_path.string();
  const std::string lab_name = labels_path.string();
  if (read_be32(img, img_name) != 0x00000803u) throw DataError(img_name + ": bad magic, expected 0x00000803");
  const std::uint32_t n_images = read_be32(img, img_name);
  const std::uint32_t rows = read_be32(img, img_name);
  const std::uint32_t cols = read_be32(img, img_name);
  if (read_be32(lab, lab_name) != 0x00000801u) throw DataError(lab_name + ": bad magic, expected 0x00000801");
  const std::uint32_t n_labels = read_be32(lab, lab_name);
  if (n_images != n_labels) {
    throw DataError("image count " + std::to_string(n_images) + " != label count " + std::to_string(n_labels));
  }

  const std::size_t pixels = std::size_t{rows} * cols;
  const auto image_bytes = read_payload(img, pixels * n_images, img_name);
  const auto label_bytes = read_payload(lab, n_labels, lab_name);

  std::vector<Sample> out(n_images);
  for (std::size_t n = 0; n < n_images; ++n) {
    out[n].features.resize(pixels);
    for (std::size_t p = 0; p < pixels; ++p) out[n].features[p] = image_bytes[n * pixels + p] / 255.0;
    out[n].label = label_bytes[n];
  }
  return out;
}

}  // namespace airfeel::data
