#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmon/util.hpp"

namespace dmon {

// One directed labeled relation between sentence indices of a document.
struct Relation {
  int head = 0;
  int tail = 0;
  std::string label;

  friend bool operator==(const Relation&, const Relation&) = default;
  friend auto operator<=>(const Relation&, const Relation&) = default;
};

// The unit of ingestion and prediction: ordered sentences plus gold directed
// relation triples.
struct Document {
  std::string doc_id;
  std::vector<std::string> sentences;
  std::vector<Relation> relations;

  int size() const { return static_cast<int>(sentences.size()); }

  friend bool operator==(const Document&, const Document&) = default;
};

// Ordered label list plus the index of the "unrelated" default class.
struct LabelSpace {
  std::vector<std::string> labels;
  int no_relation_index = 0;

  int size() const { return static_cast<int>(labels.size()); }

  const std::string& no_relation_label() const {
    return labels.at(static_cast<size_t>(no_relation_index));
  }

  std::optional<int> find(std::string_view label) const {
    for (size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) return static_cast<int>(i);
    }
    return std::nullopt;
  }

  int index_of(std::string_view label) const {
    if (auto i = find(label)) return *i;
    throw ValidationError("label '" + std::string(label) + "' is not in the label space");
  }

  void validate() const {
    if (labels.empty()) throw ValidationError("label space must be nonempty");
    for (size_t i = 0; i < labels.size(); ++i) {
      for (size_t j = i + 1; j < labels.size(); ++j) {
        if (labels[i] == labels[j]) {
          throw ValidationError("duplicate label '" + labels[i] + "' in label space");
        }
      }
    }
    if (no_relation_index < 0 || no_relation_index >= size()) {
      throw ValidationError("no_relation_index out of range");
    }
  }

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;
};

// Dense n x n matrix of class indices. Diagonal cells always hold the
// no-relation class.
struct LabelMatrix {
  int n = 0;
  std::vector<int> values;  // row-major

  static LabelMatrix filled(int n, int fill) {
    LabelMatrix m;
    m.n = n;
    m.values.assign(static_cast<size_t>(n) * n, fill);
    return m;
  }

  int& at(int i, int j) { return values[static_cast<size_t>(i) * n + j]; }
  int at(int i, int j) const { return values[static_cast<size_t>(i) * n + j]; }

  friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;
};

// Checks Document invariants that do not need a label space: index bounds,
// no self pairs, no duplicate (head, tail) pairs.
void validate_document(const Document& doc);

// Additionally checks that every relation label is a member of the space.
void validate_document(const Document& doc, const LabelSpace& space);

}  // namespace dmon
