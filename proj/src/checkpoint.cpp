// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include "mimonerf/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace mimonerf {

namespace {

struct Writer {
  std::ofstream out;
  uint64_t offset = 0;
  explicit Writer(const std::string& path) : out(path, std::ios::binary) {}
  void bytes(const void* p, size_t n) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
    offset += n;
  }
  template <class T>
  void pod(T v) {
    bytes(&v, sizeof(T));
  }
};

struct Reader {
  std::ifstream in;
  uint64_t offset = 0;
  std::string path;
  Reader(const std::string& p) : in(p, std::ios::binary), path(p) {}
  void bytes(void* p, size_t n) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n))
      throw IoError(path + ": truncated checkpoint at byte offset " + std::to_string(offset));
    offset += n;
  }
  template <class T>
  T pod() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
};

// Payload tensor order, per network: w0, b0, w1, b1, ...; networks and
// optimizer moments in this fixed sequence.
template <class Fn>
void for_each_tensor(const Checkpoint& c, Fn&& fn) {
  auto net = [&](const NetParams<float>& p) {
    for (size_t i = 0; i < p.w.size(); ++i) {
      fn(p.w[i].data(), static_cast<uint64_t>(p.w[i].size()));
      fn(p.b[i].data(), static_cast<uint64_t>(p.b[i].size()));
    }
  };
  net(c.coarse);
  net(c.fine);
  net(c.adam_coarse.m);
  net(c.adam_coarse.v);
  net(c.adam_fine.m);
  net(c.adam_fine.v);
}

template <class Fn>
void for_each_tensor_mut(Checkpoint& c, Fn&& fn) {
  auto net = [&](NetParams<float>& p) {
    for (size_t i = 0; i < p.w.size(); ++i) {
      fn(p.w[i].data(), static_cast<uint64_t>(p.w[i].size()));
      fn(p.b[i].data(), static_cast<uint64_t>(p.b[i].size()));
    }
  };
  net(c.coarse);
  net(c.fine);
  net(c.adam_coarse.m);
  net(c.adam_coarse.v);
  net(c.adam_fine.m);
  net(c.adam_fine.v);
}

void write_field(Writer& w, const FieldConfig& f) {
  w.pod<uint32_t>(static_cast<uint32_t>(f.arch.n_p));
  w.pod<uint32_t>(static_cast<uint32_t>(f.arch.hidden_width));
  w.pod<uint32_t>(static_cast<uint32_t>(f.arch.depth));
  w.pod<uint32_t>(static_cast<uint32_t>(f.arch.color_hidden_width));
  w.pod<uint32_t>(static_cast<uint32_t>(f.arch.skip_layers.size()));
  for (int s : f.arch.skip_layers) w.pod<uint32_t>(static_cast<uint32_t>(s));
  for (const EncodingSpec* e : {&f.pos_enc, &f.dir_enc}) {
    w.pod<uint32_t>(static_cast<uint32_t>(e->num_frequencies));
    w.pod<uint8_t>(e->include_input ? 1 : 0);
    w.pod<uint8_t>(e->use_pi ? 1 : 0);
  }
}

FieldConfig read_field(Reader& r) {
  const int n_p = static_cast<int>(r.pod<uint32_t>());
  const int width = static_cast<int>(r.pod<uint32_t>());
  const int depth = static_cast<int>(r.pod<uint32_t>());
  const int color_hidden = static_cast<int>(r.pod<uint32_t>());
  const uint32_t n_skips = r.pod<uint32_t>();
  std::vector<int> skips;
  for (uint32_t i = 0; i < n_skips; ++i) skips.push_back(static_cast<int>(r.pod<uint32_t>()));
  EncodingSpec enc[2];
  for (EncodingSpec& e : enc) {
    e.num_frequencies = static_cast<int>(r.pod<uint32_t>());
    e.include_input = r.pod<uint8_t>() != 0;
    e.use_pi = r.pod<uint8_t>() != 0;
    e.input_dim = 3;
  }
  FieldConfig f;
  f.pos_enc = enc[0];
  f.dir_enc = enc[1];
  f.arch.n_p = n_p;
  f.arch.hidden_width = width;
  f.arch.depth = depth;
  f.arch.color_hidden_width = color_hidden;
  f.arch.skip_layers = skips;
  f.arch.main_input_dim = n_p * f.pos_enc.output_dim();
  f.arch.aux_input_dim = f.dir_enc.output_dim();
  f.arch.validate();
  return f;
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    Writer w(tmp);
    if (!w.out) throw IoError("cannot write " + tmp);
    w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
    w.pod<uint32_t>(kCheckpointVersion);
    write_field(w, c.field);
    w.pod<int64_t>(c.iteration);
    w.pod<float>(c.adam_coarse.hyper.lr);
    w.pod<float>(c.adam_coarse.hyper.beta1);
    w.pod<float>(c.adam_coarse.hyper.beta2);
    w.pod<float>(c.adam_coarse.hyper.eps);
    w.pod<int64_t>(c.adam_coarse.t);
    w.pod<int64_t>(c.adam_fine.t);

    uint32_t n_tensors = 0;
    uint64_t total = 0;
    for_each_tensor(c, [&](const float*, uint64_t count) {
      ++n_tensors;
      total += count;
    });
    w.pod<uint32_t>(n_tensors);
    uint64_t running = 0;
    for_each_tensor(c, [&](const float*, uint64_t count) {
      w.pod<uint64_t>(running * sizeof(float));  // byte offset into payload
      w.pod<uint64_t>(count);
      running += count;
    });
    w.pod<uint32_t>(static_cast<uint32_t>(c.config_text.size()));
    w.bytes(c.config_text.data(), c.config_text.size());
    for_each_tensor(c, [&](const float* data, uint64_t count) {
      w.bytes(data, count * sizeof(float));
    });
    (void)total;
    if (!w.out) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  if (!r.in) throw IoError("cannot read " + path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw IoError(path + ": not a mimonerf checkpoint (bad magic)");
  const uint32_t version = r.pod<uint32_t>();
  if (version != kCheckpointVersion)
    throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));

  Checkpoint c;
  c.field = read_field(r);
  c.iteration = r.pod<int64_t>();
  AdamHyper hyper;
  hyper.lr = r.pod<float>();
  hyper.beta1 = r.pod<float>();
  hyper.beta2 = r.pod<float>();
  hyper.eps = r.pod<float>();
  const int64_t t_coarse = r.pod<int64_t>();
  const int64_t t_fine = r.pod<int64_t>();

  // Allocate tensors from the architecture, then stream the payload.
  auto shaped = [&]() {
    NetParams<float> p;
    p.w.resize(c.field.arch.tensor_count());
    p.b.resize(c.field.arch.tensor_count());
    for (int t = 0; t < c.field.arch.tensor_count(); ++t) {
      p.w[t].setZero(c.field.arch.tensor_out_dim(t), c.field.arch.tensor_in_dim(t));
      p.b[t].setZero(c.field.arch.tensor_out_dim(t));
    }
    return p;
  };
  c.coarse = shaped();
  c.fine = shaped();
  c.adam_coarse = adam_init(c.coarse, hyper);
  c.adam_fine = adam_init(c.fine, hyper);
  c.adam_coarse.t = t_coarse;
  c.adam_fine.t = t_fine;

  const uint32_t n_tensors = r.pod<uint32_t>();
  uint32_t expected = 0;
  uint64_t expected_count = 0;
  for_each_tensor(c, [&](const float*, uint64_t count) {
    ++expected;
    expected_count += count;
  });
  if (n_tensors != expected)
    throw IoError(path + ": tensor count mismatch (checkpoint architecture disagrees)");
  uint64_t running = 0;
  for (uint32_t i = 0; i < n_tensors; ++i) {
    const uint64_t off = r.pod<uint64_t>();
    const uint64_t count = r.pod<uint64_t>();
    if (off != running * sizeof(float))
      throw IoError(path + ": inconsistent offset table entry " + std::to_string(i));
    running += count;
  }
  if (running != expected_count) throw IoError(path + ": payload size mismatch");
  const uint32_t cfg_len = r.pod<uint32_t>();
  c.config_text.resize(cfg_len);
  if (cfg_len) r.bytes(c.config_text.data(), cfg_len);
  for_each_tensor_mut(c, [&](float* data, uint64_t count) { r.bytes(data, count * sizeof(float)); });
  if (!c.coarse.all_values_finite() || !c.fine.all_values_finite())
    throw IoError(path + ": checkpoint holds non-finite parameters");
  return c;
}

}  // namespace mimonerf
