// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#include "kec/ad/checkpoint.hpp"

#include <algorithm>

#include "kec/error.hpp"
#include "kec/util.hpp"

namespace kec::ad {
namespace {

constexpr std::uint8_t kMagic[4] = {'K', 'E', 'C', 'P'};

void write_doubles(ByteWriter& w, const std::vector<double>& v) {
  w.u64(v.size());
  for (double x : v) w.f64(x);
}

std::vector<double> read_doubles(ByteReader& r) {
  const std::uint64_t n = r.u64();
  if (n > r.remaining() / sizeof(double)) throw CorruptionError("checkpoint array length exceeds payload");
  std::vector<double> v(n);
  for (double& x : v) x = r.f64();
  return v;
}

}  // namespace

Checkpoint make_checkpoint(std::string config_text, const ParamStore& store, const AdamW* optimizer) {
  Checkpoint ck;
  ck.config_text = std::move(config_text);
  for (std::size_t i = 0; i < store.count(); ++i) {
    const Parameter& p = store.at(i);
    ck.params.push_back({p.name(), p.shape(), p.value()});
  }
  if (optimizer) {
    ck.optimizer_config = optimizer->config();
    ck.optimizer_state = optimizer->state();
  }
  return ck;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.str(ck.config_text);
  w.u64(ck.params.size());
  for (const NamedTensor& t : ck.params) {
    w.str(t.name);
    w.u64(t.shape.rows);
    w.u64(t.shape.cols);
    write_doubles(w, t.values);
  }
  w.u8(ck.optimizer_state ? 1 : 0);
  if (ck.optimizer_state) {
    const AdamWConfig c = ck.optimizer_config.value_or(AdamWConfig{});
    for (double x : {c.lr, c.beta1, c.beta2, c.eps, c.weight_decay}) w.f64(x);
    w.u64(ck.optimizer_state->step);
    w.u64(ck.optimizer_state->m.size());
    for (std::size_t i = 0; i < ck.optimizer_state->m.size(); ++i) {
      write_doubles(w, ck.optimizer_state->m[i]);
      write_doubles(w, ck.optimizer_state->v[i]);
    }
  }
  const std::uint32_t crc = crc32(w.data());
  w.u32(crc);
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw CorruptionError("checkpoint truncated");
  auto body = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.last(4));
  if (tail.u32() != crc32(body)) throw CorruptionError("checkpoint failed checksum");
  ByteReader r(body);
  auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) throw CorruptionError("not a checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw CorruptionError("checkpoint version " + std::to_string(version) + " unsupported");
  Checkpoint ck;
  ck.config_text = r.str();
  const std::uint64_t n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    NamedTensor t;
    t.name = r.str();
    t.shape.rows = r.u64();
    t.shape.cols = r.u64();
    t.values = read_doubles(r);
    if (t.values.size() != t.shape.size()) throw CorruptionError("checkpoint tensor '" + t.name + "' size mismatch");
    ck.params.push_back(std::move(t));
  }
  if (r.u8()) {
    AdamWConfig c;
    c.lr = r.f64();
    c.beta1 = r.f64();
    c.beta2 = r.f64();
    c.eps = r.f64();
    c.weight_decay = r.f64();
    ck.optimizer_config = c;
    OptimizerState s;
    s.step = r.u64();
    const std::uint64_t count = r.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
      s.m.push_back(read_doubles(r));
      s.v.push_back(read_doubles(r));
    }
    ck.optimizer_state = std::move(s);
  }
  if (!r.done()) throw CorruptionError("trailing bytes in checkpoint");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const auto bytes = encode_checkpoint(ck);
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  return decode_checkpoint(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
}

void restore_params(ParamStore& store, const Checkpoint& ck) {
  if (ck.params.size() != store.count())
    throw ValidationError("checkpoint has " + std::to_string(ck.params.size()) + " tensors, model expects " +
                          std::to_string(store.count()));
  for (const NamedTensor& t : ck.params) {
    Parameter& p = store.get(t.name);
    if (p.shape() != t.shape)
      throw ValidationError("checkpoint tensor '" + t.name + "' has shape " + t.shape.str() + ", model expects " +
                            p.shape().str());
    p.value() = t.values;
  }
}

}  // namespace kec::ad
