#include "dmon/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace dmon {

double confidence_margin(std::span<const double> logits) {
  if (logits.size() < 2) {
    throw ValidationError("confidence margin needs at least two classes");
  }
  double max_logit = logits[0];
  for (double x : logits) max_logit = std::max(max_logit, x);
  double denom = 0.0;
  for (double x : logits) denom += std::exp(x - max_logit);

  double top1 = -1.0, top2 = -1.0;
  for (double x : logits) {
    const double p = std::exp(x - max_logit) / denom;
    if (p > top1) {
      top2 = top1;
      top1 = p;
    } else if (p > top2) {
      top2 = p;
    }
  }
  return top1 - top2;
}

namespace {

int argmax(std::span<const double> v) {
  int best = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

FusedPrediction fuse(const BranchLogits& head, const BranchLogits& tail, VoterMode mode) {
  if (head.m != tail.m || head.l != tail.l) {
    throw ValidationError("fuse: branch logits must share shape");
  }
  const int n = head.m;
  FusedPrediction out;
  out.n = n;
  out.labels = LabelMatrix::filled(n, 0);
  out.source.assign(static_cast<size_t>(n) * n, Branch::head);
  out.margins_h.assign(static_cast<size_t>(n) * n, 0.0);
  out.margins_t.assign(static_cast<size_t>(n) * n, 0.0);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto h = head.cell(i, j);
      const auto t = tail.cell(i, j);
      const double mh = confidence_margin(h);
      const double mt = confidence_margin(t);
      out.margins_h[static_cast<size_t>(i) * n + j] = mh;
      out.margins_t[static_cast<size_t>(i) * n + j] = mt;

      Branch winner;
      switch (mode) {
        case VoterMode::force_head:
          winner = Branch::head;
          break;
        case VoterMode::force_tail:
          winner = Branch::tail;
          break;
        case VoterMode::confidence:
        default:
          // Ties go to the head branch.
          winner = mh >= mt ? Branch::head : Branch::tail;
          break;
      }
      out.source[static_cast<size_t>(i) * n + j] = winner;
      out.labels.at(i, j) = winner == Branch::head ? argmax(h) : argmax(t);
    }
  }
  return out;
}

FusedPrediction predict_document(const Document& doc, const DmonParams& params,
                                 const EncoderBackend& backend, const LabelSpace& space,
                                 VoterMode mode) {
  if (params.num_labels() != space.size()) {
    throw ValidationError("predict: model emits " + std::to_string(params.num_labels()) +
                          " classes but the label space has " + std::to_string(space.size()));
  }
  const RelationshipTensor tensor = encode_pairs(doc, backend);
  auto [head, tail] = dmon_forward(tensor, params);
  FusedPrediction pred = fuse(head, tail, mode);
  for (int i = 0; i < pred.n; ++i) pred.labels.at(i, i) = space.no_relation_index;
  return pred;
}

}  // namespace dmon
