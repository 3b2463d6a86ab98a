#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "dmon/rng.hpp"
#include "dmon/tensor.hpp"
#include "dmon/types.hpp"

namespace dmon {

// A subset of source indices inducing an aligned sub-tensor and sub-label
// matrix. Plans from sample_crop are strictly increasing (discourse order);
// shuffle_ord deliberately returns a permuted, unsorted plan.
struct CropPlan {
  std::vector<int> indices;
  int n = 0;  // source size

  int m() const { return static_cast<int>(indices.size()); }

  friend bool operator==(const CropPlan&, const CropPlan&) = default;
};

// Samples min(m, n) indices uniformly without replacement and sorts them
// ascending. m >= n yields the identity plan without consuming randomness.
CropPlan sample_crop(int n, int m, Rng& rng);

// Gathers the sub-tensor and sub-labels: out[j][k] = in[i_j][i_k].
std::pair<RelationshipTensor, LabelMatrix> apply_crop(const RelationshipTensor& tensor,
                                                      const LabelMatrix& labels,
                                                      const CropPlan& plan);

// Order-shuffle ablation: permutes the plan's indices. Used with apply_crop
// the same permutation lands on rows and columns, so head/tail alignment is
// preserved while discourse order is broken.
CropPlan shuffle_ord(const CropPlan& plan, Rng& rng);

// Random-shuffle ablation: every output cell is filled from an independently
// drawn source cell together with its label, destroying alignment across
// cells (rows no longer share a head argument).
std::pair<RelationshipTensor, LabelMatrix> shuffle_rad(const RelationshipTensor& tensor,
                                                       const LabelMatrix& labels, int m,
                                                       Rng& rng);

// Debug serialization.
nlohmann::ordered_json crop_plan_to_json(const CropPlan& plan);
CropPlan crop_plan_from_json(const nlohmann::json& j);

}  // namespace dmon
