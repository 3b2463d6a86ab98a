#include "dmon/tensor.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace dmon {

RelationshipTensor transpose_pairs(const RelationshipTensor& t) {
  RelationshipTensor out = RelationshipTensor::zeros(t.n, t.d);
  for (int i = 0; i < t.n; ++i) {
    for (int j = 0; j < t.n; ++j) {
      const auto src = t.cell(i, j);
      auto dst = out.cell(j, i);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  return out;
}

namespace {

// Doubles are stored little-endian regardless of host order.
void to_le_bytes(double x, unsigned char out[8]) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
}

double from_le_bytes(const unsigned char in[8]) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

}  // namespace

void save_array_file(const std::filesystem::path& path, std::span<const double> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  std::vector<unsigned char> buf(data.size() * 8);
  for (size_t i = 0; i < data.size(); ++i) to_le_bytes(data[i], buf.data() + i * 8);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

std::vector<double> load_array_file(const std::filesystem::path& path, size_t expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> buf(expected_count * 8);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<size_t>(in.gcount()) != buf.size()) {
    throw IoError("'" + path.string() + "' holds fewer than " + std::to_string(expected_count) +
                  " values");
  }
  char probe;
  if (in.read(&probe, 1); in.gcount() != 0) {
    throw IoError("'" + path.string() + "' holds more than " + std::to_string(expected_count) +
                  " values");
  }
  std::vector<double> data(expected_count);
  for (size_t i = 0; i < expected_count; ++i) data[i] = from_le_bytes(buf.data() + i * 8);
  return data;
}

}  // namespace dmon
