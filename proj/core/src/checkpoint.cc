// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/checkpoint.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ols/errors.h"

namespace ols {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr std::array<char, 8> kMagic = {'O', 'L', 'S', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint64_t kHeaderOffset = 20;

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

// Bounds-checked reader over an in-memory file image.
class Reader {
 public:
  Reader(std::string file, std::string bytes)
      : file_(std::move(file)), bytes_(std::move(bytes)) {}

  template <class T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string_view take(std::uint64_t n, const char* what) {
    need(n, what);
    std::string_view v(bytes_.data() + pos_, n);
    pos_ += n;
    return v;
  }

  std::uint64_t pos() const { return pos_; }
  std::uint64_t remaining() const { return bytes_.size() - pos_; }
  const std::string& file() const { return file_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(file_, pos_, what);
  }

 private:
  void need(std::uint64_t n, const char* what) const {
    if (remaining() < n) {
      throw ParseError(file_, pos_,
                       std::string("truncated while reading ") + what);
    }
  }

  std::string file_;
  std::string bytes_;
  std::uint64_t pos_ = 0;
};

void append_tensor(std::string& out, const Tensor& t) {
  const auto values = t.data();
  out.append(reinterpret_cast<const char*>(values.data()),
             values.size() * sizeof(double));
}

}  // namespace

nlohmann::json to_json(const ModelSpec& spec) {
  return {{"arch", to_string(spec.arch)},
          {"widths", spec.widths},
          {"input_shape", spec.resolved_input_shape()},
          {"num_classes", spec.num_classes}};
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  spec.arch = parse_architecture(j.at("arch").get<std::string>());
  spec.widths = j.at("widths").get<std::vector<std::size_t>>();
  if (j.contains("input_shape")) {
    spec.input_shape = j.at("input_shape").get<Shape>();
  }
  spec.num_classes = j.at("num_classes").get<std::size_t>();
  return spec;
}

Checkpoint make_checkpoint(const Model& model, int epoch) {
  Checkpoint ckpt;
  ckpt.spec = model.spec;
  ckpt.epoch = epoch;
  for (const Param& p : model.net.params()) {
    ckpt.params.emplace_back(p.name, p.value);
  }
  return ckpt;
}

Model restore_model(const Checkpoint& ckpt) {
  Model model = build_model(ckpt.spec, 0);
  ParamSet& ps = model.net.params();
  if (ps.size() != ckpt.params.size()) {
    throw DataError("checkpoint holds " + std::to_string(ckpt.params.size()) +
                    " tensors, model expects " + std::to_string(ps.size()));
  }
  for (const auto& [name, value] : ckpt.params) {
    Param* p = ps.find(name);
    if (p == nullptr) throw DataError("checkpoint tensor '" + name + "' unknown");
    if (p->value.shape() != value.shape()) {
      throw DimensionError("checkpoint tensor '" + name + "' has shape " +
                           to_string(value.shape()) + ", expected " +
                           to_string(p->value.shape()));
    }
    p->value = value;
  }
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, value] : ckpt.params) {
    tensors.push_back({{"name", name}, {"shape", value.shape()}});
  }
  Tensor counts;
  if (ckpt.bank) {
    const std::size_t k = ckpt.bank->num_classes();
    tensors.push_back({{"name", "bank.supervision"}, {"shape", Shape{k, k}}});
    tensors.push_back({{"name", "bank.accumulator"}, {"shape", Shape{k, k}}});
    tensors.push_back({{"name", "bank.counts"}, {"shape", Shape{k}}});
    counts = Tensor({k});
    for (std::size_t y = 0; y < k; ++y) {
      counts[y] = static_cast<double>(ckpt.bank->counts()[y]);
    }
  }
  const nlohmann::json header = {
      {"format", "ols-checkpoint"},
      {"spec", to_json(ckpt.spec)},
      {"epoch", ckpt.epoch},
      {"strategy", ckpt.strategy},
      {"rng_state", ckpt.rng_state},
      {"tensors", tensors},
  };
  const std::string header_text = header.dump();

  std::string out;
  out.append(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, header_text.size());
  out += header_text;
  for (const auto& entry : ckpt.params) append_tensor(out, entry.second);
  if (ckpt.bank) {
    append_tensor(out, ckpt.bank->supervision());
    append_tensor(out, ckpt.bank->accumulator());
    append_tensor(out, counts);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError(path.string(), 0, "cannot open file");
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  Reader r(path.string(), std::move(bytes));

  const std::string_view magic = r.take(kMagic.size(), "magic");
  if (std::memcmp(magic.data(), kMagic.data(), kMagic.size()) != 0) {
    throw ParseError(r.file(), 0, "bad magic bytes");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw VersionError(r.file() + ": checkpoint format version " +
                       std::to_string(version) + ", this build reads " +
                       std::to_string(kCheckpointVersion));
  }
  const auto header_len = r.get<std::uint64_t>("header length");
  const std::string_view header_text = r.take(header_len, "header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(r.file(), kHeaderOffset + e.byte, "header is not valid JSON");
  }

  Checkpoint ckpt;
  std::vector<std::pair<std::string, Shape>> table;
  try {
    ckpt.spec = model_spec_from_json(header.at("spec"));
    ckpt.epoch = header.at("epoch").get<int>();
    ckpt.strategy = header.at("strategy").get<std::string>();
    ckpt.rng_state = header.at("rng_state").get<std::string>();
    for (const auto& t : header.at("tensors")) {
      table.emplace_back(t.at("name").get<std::string>(),
                         t.at("shape").get<Shape>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(r.file(), kHeaderOffset,
                     std::string("malformed header: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(r.file(), kHeaderOffset,
                     std::string("malformed header: ") + e.what());
  }

  std::optional<Tensor> supervision, accumulator, counts;
  for (const auto& [name, shape] : table) {
    const std::size_t n = shape_size(shape);
    if (n > r.remaining() / sizeof(double)) {
      r.fail("truncated in tensor '" + name + "'");
    }
    std::vector<double> values(n);
    const std::string_view raw = r.take(n * sizeof(double), "tensor data");
    std::memcpy(values.data(), raw.data(), raw.size());
    Tensor t(shape, std::move(values));
    if (name == "bank.supervision") {
      supervision = std::move(t);
    } else if (name == "bank.accumulator") {
      accumulator = std::move(t);
    } else if (name == "bank.counts") {
      counts = std::move(t);
    } else {
      ckpt.params.emplace_back(name, std::move(t));
    }
  }
  if (r.remaining() != 0) r.fail("unexpected trailing bytes");

  if (supervision || accumulator || counts) {
    if (!supervision || !accumulator || !counts) {
      throw ParseError(r.file(), kHeaderOffset, "incomplete soft label bank");
    }
    std::vector<std::uint64_t> c(counts->size());
    for (std::size_t y = 0; y < c.size(); ++y) {
      c[y] = static_cast<std::uint64_t>((*counts)[y]);
    }
    ckpt.bank.emplace(std::move(*supervision), std::move(*accumulator),
                      std::move(c));
  }
  return ckpt;
}

}  // namespace ols
