#pragma once

// Checkpoint container (little-endian, fixed-width):
//
//   magic     8 bytes  "UMGADCKP"
//   version   u32      kCheckpointVersion
//   relations u64, repeats u64, feature_dim u64, hidden_dim u64
//   adam_step i64
//   count     u64      number of tensors
//   count x { name_len u64, name bytes, rows u64, cols u64,
//             value f64[rows*cols], adam_m f64[rows*cols], adam_v f64[rows*cols] }
//
// Doubles are written as raw IEEE-754 bits, so save -> load is bit-exact.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "umgad/training.hpp"

namespace umgad {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'U', 'M', 'G', 'A', 'D', 'C', 'K', 'P'};

namespace ckpt_detail {
static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("checkpoint truncated");
  return v;
}

inline void put_values(std::ostream& out, const Matrix& m) {
  out.write(reinterpret_cast<const char*>(m.values().data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

inline void get_values(std::istream& in, Matrix& m) {
  in.read(reinterpret_cast<char*>(m.values().data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw IoError("checkpoint truncated");
}
}  // namespace ckpt_detail

inline void save_checkpoint(const TrainState& st, const std::filesystem::path& path) {
  using namespace ckpt_detail;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  const ModelParams& p = st.params;
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, p.relations());
  put<std::uint64_t>(out, p.repeats());
  put<std::uint64_t>(out, p.feature_dim());
  put<std::uint64_t>(out, p.hidden_dim());
  put<std::int64_t>(out, st.adam.step);
  put<std::uint64_t>(out, p.tensors().size());
  const bool have_moments = st.adam.m.size() == p.tensors().size();
  for (std::size_t i = 0; i < p.tensors().size(); ++i) {
    const ParamTensor& t = p.tensors()[i];
    put<std::uint64_t>(out, t.name.size());
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint64_t>(out, t.value.rows());
    put<std::uint64_t>(out, t.value.cols());
    put_values(out, t.value);
    const Matrix zeros(t.value.rows(), t.value.cols());
    put_values(out, have_moments ? st.adam.m[i] : zeros);
    put_values(out, have_moments ? st.adam.v[i] : zeros);
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

inline TrainState load_checkpoint(const std::filesystem::path& path) {
  using namespace ckpt_detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) throw VersionMismatch("not a checkpoint: bad magic in " + path.string());
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw VersionMismatch("checkpoint version " + std::to_string(version) + ", expected " + std::to_string(kCheckpointVersion));
  const auto relations = get<std::uint64_t>(in);
  const auto repeats = get<std::uint64_t>(in);
  const auto feature_dim = get<std::uint64_t>(in);
  const auto hidden_dim = get<std::uint64_t>(in);
  TrainState st{ModelParams(relations, repeats, feature_dim, hidden_dim), {}};
  st.adam.step = get<std::int64_t>(in);
  const auto count = get<std::uint64_t>(in);
  if (count != st.params.tensors().size()) throw VersionMismatch("checkpoint tensor count does not match its declared shape");
  for (auto& t : st.params.tensors()) {
    const auto len = get<std::uint64_t>(in);
    if (len > 4096) throw VersionMismatch("corrupt tensor name length");
    std::string name(len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(len));
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    if (name != t.name || rows != t.value.rows() || cols != t.value.cols())
      throw VersionMismatch("checkpoint tensor '" + name + "' does not match expected '" + t.name + "'");
    get_values(in, t.value);
    Matrix m(rows, cols), v(rows, cols);
    get_values(in, m);
    get_values(in, v);
    st.adam.m.push_back(std::move(m));
    st.adam.v.push_back(std::move(v));
    t.zero_grad();
  }
  return st;
}

}  // namespace umgad
