#pragma once

#include <span>
#include <vector>

#include "dmon/encoder.hpp"
#include "dmon/model.hpp"
#include "dmon/types.hpp"

namespace dmon {

// Softmax the logits and return top-1 minus top-2 probability, in [0, 1).
double confidence_margin(std::span<const double> logits);

enum class VoterMode { confidence, force_head, force_tail };

// Per-cell merged prediction plus which branch won and both margins.
struct FusedPrediction {
  int n = 0;
  LabelMatrix labels;
  std::vector<Branch> source;      // (n, n) row-major
  std::vector<double> margins_h;   // (n, n)
  std::vector<double> margins_t;   // (n, n)

  Branch source_at(int i, int j) const { return source[static_cast<size_t>(i) * n + j]; }
  double margin_h(int i, int j) const { return margins_h[static_cast<size_t>(i) * n + j]; }
  double margin_t(int i, int j) const { return margins_t[static_cast<size_t>(i) * n + j]; }
};

// Confidence-voted merge: a cell takes the argmax of whichever branch has the
// larger top1-top2 margin, ties going to the head branch. force_head /
// force_tail reproduce the voter ablations exactly.
FusedPrediction fuse(const BranchLogits& head, const BranchLogits& tail,
                     VoterMode mode = VoterMode::confidence);

// Full-tensor inference (no cropping): encode, run both towers, fuse, then
// force diagonal cells to the no-relation class.
FusedPrediction predict_document(const Document& doc, const DmonParams& params,
                                 const EncoderBackend& backend, const LabelSpace& space,
                                 VoterMode mode = VoterMode::confidence);

}  // namespace dmon
