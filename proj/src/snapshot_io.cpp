#include "burgers/snapshot_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "burgers/errors.hpp"

namespace burgers {

namespace {

constexpr std::array<char, 4> kMagic{'B', 'R', 'G', '1'};

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw Error("BRG1: truncated stream");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

}  // namespace

void write_snapshot(std::ostream& out, const Snapshot& snap) {
  if (snap.samples.size() > UINT32_MAX) throw Error("BRG1: too many samples");
  out.write(kMagic.data(), kMagic.size());
  put_le(out, static_cast<std::uint32_t>(snap.samples.size()));
  put_f64(out, snap.time);
  put_f64(out, snap.nu);
  for (double v : snap.samples) put_f64(out, v);
  if (!out) throw Error("BRG1: write failed");
}

Snapshot read_snapshot(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error("BRG1: bad magic");
  Snapshot snap;
  const auto n = get_le<std::uint32_t>(in);
  snap.time = get_f64(in);
  snap.nu = get_f64(in);
  snap.samples.resize(n);
  for (auto& v : snap.samples) v = get_f64(in);
  return snap;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_snapshot(out, snap);
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_snapshot(in);
}

}  // namespace burgers
