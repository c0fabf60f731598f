// Copyright 2026 The ehrgan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ehrgan/checkpoint.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "ehrgan/errors.h"

namespace ehrgan {
namespace {

constexpr char kMagic[8] = {'E', 'H', 'R', 'G', 'A', 'N', 'C', 'K'};
// Sanity bound on any length field, to fail fast on corrupt files.
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 34;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw FormatError("truncated checkpoint");
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  if (n > kMaxLength) throw FormatError("corrupt checkpoint: string length " + std::to_string(n));
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw FormatError("truncated checkpoint");
  return s;
}

void put_params(std::ostream& out, const ParamSet& p) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::string& name = p.name(i);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint64_t>(out, p[i].rows());
    put<std::uint64_t>(out, p[i].cols());
    out.write(reinterpret_cast<const char*>(p[i].data()),
              static_cast<std::streamsize>(p[i].size() * sizeof(double)));
  }
}

ParamSet get_params(std::istream& in) {
  ParamSet p;
  const auto count = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(in);
    if (len > 4096) throw FormatError("corrupt checkpoint: parameter name length");
    std::string name(len, '\0');
    in.read(name.data(), len);
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    if (rows * cols > kMaxLength) throw FormatError("corrupt checkpoint: tensor size");
    Tensor t(rows, cols);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) throw FormatError("truncated checkpoint");
    p.add(std::move(name), std::move(t));
  }
  return p;
}

void check_layout(const ParamSet& p, const MlpSpec& spec, const char* what) {
  bool ok = p.size() == 2 * spec.layers();
  for (std::size_t l = 0; ok && l < spec.layers(); ++l) {
    ok = p[2 * l].rows() == spec.sizes[l] && p[2 * l].cols() == spec.sizes[l + 1] &&
         p[2 * l + 1].rows() == 1 && p[2 * l + 1].cols() == spec.sizes[l + 1];
  }
  if (!ok) throw FormatError(std::string("checkpoint ") + what + " does not match its config");
}

}  // namespace

void write_checkpoint(std::ostream& out, const GanState& s) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put_string(out, to_json(s.config).dump());
  put<std::uint64_t>(out, s.epoch);
  put<std::uint64_t>(out, s.critic_updates);
  put<std::uint64_t>(out, s.generator_updates);
  put_params(out, s.generator);
  put_params(out, s.critic);
  put_params(out, s.generator_optimizer.first_moment());
  put_params(out, s.generator_optimizer.second_moment());
  put_params(out, s.critic_optimizer.first_moment());
  put_params(out, s.critic_optimizer.second_moment());
  put<std::uint64_t>(out, s.generator_optimizer.steps());
  put<std::uint64_t>(out, s.critic_optimizer.steps());
  put_string(out, rng_state(s.batch_rng));
  put_string(out, rng_state(s.noise_rng));
  put_string(out, rng_state(s.privacy_rng));
}

GanState read_checkpoint(std::istream& in) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a checkpoint file");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  GanState s;
  try {
    s.config = gan_config_from_json(nlohmann::json::parse(get_string(in)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  }
  s.epoch = get<std::uint64_t>(in);
  s.critic_updates = get<std::uint64_t>(in);
  s.generator_updates = get<std::uint64_t>(in);
  s.generator = get_params(in);
  s.critic = get_params(in);
  check_layout(s.generator, s.config.generator_spec(), "generator");
  check_layout(s.critic, s.config.critic_spec(), "critic");
  ParamSet gm = get_params(in);
  ParamSet gv = get_params(in);
  ParamSet cm = get_params(in);
  ParamSet cv = get_params(in);
  const auto gsteps = get<std::uint64_t>(in);
  const auto csteps = get<std::uint64_t>(in);
  s.generator_optimizer = Optimizer(s.config.generator_optimizer, s.generator);
  s.generator_optimizer.restore(gsteps, std::move(gm), std::move(gv));
  s.critic_optimizer = Optimizer(s.config.critic_optimizer, s.critic);
  s.critic_optimizer.restore(csteps, std::move(cm), std::move(cv));
  set_rng_state(s.batch_rng, get_string(in));
  set_rng_state(s.noise_rng, get_string(in));
  set_rng_state(s.privacy_rng, get_string(in));
  return s;
}

void save_checkpoint(const std::string& path, const GanState& state) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PathError("cannot write checkpoint '" + path + "'");
    write_checkpoint(out, state);
    if (!out) throw PathError("short write to checkpoint '" + path + "'");
  }
  std::filesystem::rename(tmp, path);
}

GanState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PathError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace ehrgan
