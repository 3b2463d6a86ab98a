#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dmon/util.hpp"

namespace dmon {

// A length x channels sequence, row-major over time steps. This is the unit
// the 1-D convolutions operate on.
struct Seq {
  int len = 0;
  int ch = 0;
  std::vector<double> v;

  static Seq zeros(int len, int ch) {
    Seq s;
    s.len = len;
    s.ch = ch;
    s.v.assign(static_cast<size_t>(len) * ch, 0.0);
    return s;
  }

  double& at(int t, int c) { return v[static_cast<size_t>(t) * ch + c]; }
  double at(int t, int c) const { return v[static_cast<size_t>(t) * ch + c]; }

  std::span<double> step(int t) { return {v.data() + static_cast<size_t>(t) * ch, static_cast<size_t>(ch)}; }
  std::span<const double> step(int t) const {
    return {v.data() + static_cast<size_t>(t) * ch, static_cast<size_t>(ch)};
  }

  bool all_finite() const {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }
};

// n x n x d array of pairwise embeddings; cell (i, j) encodes head i, tail j.
struct RelationshipTensor {
  int n = 0;
  int d = 0;
  std::vector<double> values;  // (n, n, d) row-major

  static RelationshipTensor zeros(int n, int d) {
    RelationshipTensor t;
    t.n = n;
    t.d = d;
    t.values.assign(static_cast<size_t>(n) * n * d, 0.0);
    return t;
  }

  double& at(int i, int j, int c) {
    return values[(static_cast<size_t>(i) * n + j) * d + c];
  }
  double at(int i, int j, int c) const {
    return values[(static_cast<size_t>(i) * n + j) * d + c];
  }

  std::span<double> cell(int i, int j) {
    return {values.data() + (static_cast<size_t>(i) * n + j) * d, static_cast<size_t>(d)};
  }
  std::span<const double> cell(int i, int j) const {
    return {values.data() + (static_cast<size_t>(i) * n + j) * d, static_cast<size_t>(d)};
  }

  // Row i as a (n, d) sequence: positions are tail indices.
  Seq row_seq(int i) const {
    Seq s = Seq::zeros(n, d);
    std::copy(values.begin() + static_cast<long>(i) * n * d,
              values.begin() + static_cast<long>(i + 1) * n * d, s.v.begin());
    return s;
  }

  bool all_finite() const {
    for (double x : values) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  friend bool operator==(const RelationshipTensor&, const RelationshipTensor&) = default;
};

// Swaps the first two axes: out[i][j] = in[j][i].
RelationshipTensor transpose_pairs(const RelationshipTensor& t);

// Little-endian raw double array files. These back the checkpoint archive and
// the on-disk tensor cache.
void save_array_file(const std::filesystem::path& path, std::span<const double> data);
std::vector<double> load_array_file(const std::filesystem::path& path, size_t expected_count);

}  // namespace dmon
