#pragma once

// Binary checkpoint container:
//   "TLCK" | u32 format | u64 meta length | meta JSON
//   | u32 tensor count | { u32 name length | name | u64 count | f64[count] }*
//   | SHA-256 of all preceding bytes
// Integers and doubles are stored in host (little-endian) byte order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "../core/error.hpp"
#include "../core/hash.hpp"
#include "../core/io.hpp"
#include "ppo.hpp"

namespace tl {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian hosts");

inline constexpr std::uint32_t kCheckpointFormat = 1;
inline constexpr std::string_view kCheckpointMagic = "TLCK";

struct CheckpointMeta {
  std::string player_id;
  int iteration = 0;
  nlohmann::json league = nlohmann::json::object();  // free-form league bookkeeping

  bool operator==(const CheckpointMeta&) const = default;
};

struct Checkpoint {
  Learner learner;
  CheckpointMeta meta;
};

namespace ckpt_detail {

template <typename T>
void put(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

struct Reader {
  std::string_view bytes;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (bytes.size() - pos < n) throw Error(Errc::CorruptChecksum, "checkpoint truncated");
  }
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
};

using Tensors = std::map<std::string, std::vector<double>>;

inline void add_adam(Tensors& t, const std::string& name, const Adam& a) {
  if (a.m.empty()) return;
  t[name + ".m"] = a.m;
  t[name + ".v"] = a.v;
  t[name + ".t"] = {static_cast<double>(a.t)};
}

inline void read_adam(Tensors& t, const std::string& name, Adam& a) {
  if (!t.contains(name + ".m")) return;
  a.m = t[name + ".m"];
  a.v = t[name + ".v"];
  a.t = static_cast<std::uint64_t>(t[name + ".t"].at(0));
}

}  // namespace ckpt_detail

inline std::string encode_checkpoint(const Learner& learner, const CheckpointMeta& meta) {
  using namespace ckpt_detail;
  const auto& p = learner.params;
  nlohmann::json m = {{"player_id", meta.player_id},
                      {"iteration", meta.iteration},
                      {"league", meta.league},
                      {"version", p.version},
                      {"actor_sizes", p.actor.sizes()},
                      {"critic_sizes", p.critic.sizes()},
                      {"norm_clip", p.norm.clip}};
  Tensors t;
  t["actor"] = p.actor.params();
  t["log_std"] = p.log_std;
  t["critic"] = p.critic.params();
  t["norm.mean"] = p.norm.mean;
  t["norm.m2"] = p.norm.m2;
  t["norm.count"] = {p.norm.count};
  add_adam(t, "adam.actor", learner.actor_opt);
  add_adam(t, "adam.log_std", learner.log_std_opt);
  add_adam(t, "adam.critic", learner.critic_opt);

  std::string out(kCheckpointMagic);
  put<std::uint32_t>(out, kCheckpointFormat);
  const std::string js = m.dump();
  put<std::uint64_t>(out, js.size());
  out += js;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.size()));
  for (const auto& [name, v] : t) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint64_t>(out, v.size());
    for (double x : v) put(out, x);
  }
  const Digest d = sha256(out);
  out.append(reinterpret_cast<const char*>(d.data()), d.size());
  return out;
}

inline Checkpoint decode_checkpoint(std::string_view bytes) {
  using namespace ckpt_detail;
  Reader r{bytes};
  if (r.take(kCheckpointMagic.size()) != kCheckpointMagic)
    throw Error(Errc::CorruptChecksum, "not a checkpoint file (bad magic)");
  const auto format = r.get<std::uint32_t>();
  if (format != kCheckpointFormat)
    throw Error(Errc::VersionMismatch, "checkpoint format " + std::to_string(format) + ", reader supports " +
                                           std::to_string(kCheckpointFormat));
  if (bytes.size() < r.pos + sizeof(Digest)) throw Error(Errc::CorruptChecksum, "checkpoint truncated");
  const std::string_view body = bytes.substr(0, bytes.size() - sizeof(Digest));
  const Digest d = sha256(body);
  if (std::memcmp(d.data(), bytes.data() + body.size(), d.size()) != 0)
    throw Error(Errc::CorruptChecksum, "checkpoint digest mismatch");

  r.bytes = body;
  const auto meta_len = r.get<std::uint64_t>();
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(r.take(meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::CorruptChecksum, std::string("checkpoint metadata unreadable: ") + e.what());
  }
  Tensors t;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name = std::string(r.take(r.get<std::uint32_t>()));
    const auto n = r.get<std::uint64_t>();
    r.need(n * sizeof(double));
    std::vector<double> v(n);
    for (auto& x : v) x = r.get<double>();
    t[name] = std::move(v);
  }

  Checkpoint c;
  auto& p = c.learner.params;
  try {
    c.meta.player_id = m.at("player_id").get<std::string>();
    c.meta.iteration = m.at("iteration").get<int>();
    c.meta.league = m.at("league");
    p.version = m.at("version").get<std::uint64_t>();
    p.actor = Mlp(m.at("actor_sizes").get<std::vector<std::size_t>>());
    p.critic = Mlp(m.at("critic_sizes").get<std::vector<std::size_t>>());
    p.norm.clip = m.at("norm_clip").get<double>();
    auto fill = [&](const char* name, std::vector<double>& dst, std::size_t expect) {
      auto it = t.find(name);
      if (it == t.end() || it->second.size() != expect)
        throw Error(Errc::DimensionMismatch, std::string("checkpoint tensor ") + name + " missing or misshapen");
      dst = it->second;
    };
    fill("actor", p.actor.params(), p.actor.num_params());
    fill("critic", p.critic.params(), p.critic.num_params());
    fill("log_std", p.log_std, p.actor.outputs());
    fill("norm.mean", p.norm.mean, p.actor.inputs());
    fill("norm.m2", p.norm.m2, p.actor.inputs());
    std::vector<double> cnt;
    fill("norm.count", cnt, 1);
    p.norm.count = cnt[0];
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::CorruptChecksum, std::string("checkpoint metadata incomplete: ") + e.what());
  }
  read_adam(t, "adam.actor", c.learner.actor_opt);
  read_adam(t, "adam.log_std", c.learner.log_std_opt);
  read_adam(t, "adam.critic", c.learner.critic_opt);
  return c;
}

/// Digest of the parameters alone (no optimizer state or metadata).
inline std::string params_hash(const PolicyParams& p) {
  return sha256_hex(encode_checkpoint(Learner{p, {}, {}, {}}, CheckpointMeta{}));
}

inline void save_checkpoint(const std::filesystem::path& path, const Learner& learner, const CheckpointMeta& meta) {
  write_file_atomic(path, encode_checkpoint(learner, meta));
}

inline void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params, const CheckpointMeta& meta) {
  save_checkpoint(path, Learner{params, {}, {}, {}}, meta);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace tl
