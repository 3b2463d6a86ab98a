#include "dmon/cropping.hpp"

#include <algorithm>
#include <numeric>

namespace dmon {

namespace {

void check_plan(const CropPlan& plan) {
  if (plan.n < 1) throw ValidationError("crop plan: source size must be >= 1");
  if (plan.indices.empty()) throw ValidationError("crop plan: no indices");
  std::vector<int> sorted = plan.indices;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] < 0 || sorted[i] >= plan.n) {
      throw ValidationError("crop plan: index " + std::to_string(sorted[i]) + " out of [0, " +
                            std::to_string(plan.n) + ")");
    }
    if (i > 0 && sorted[i] == sorted[i - 1]) {
      throw ValidationError("crop plan: duplicate index " + std::to_string(sorted[i]));
    }
  }
}

}  // namespace

CropPlan sample_crop(int n, int m, Rng& rng) {
  if (n <= 0) throw ValidationError("sample_crop: n must be positive");
  if (m <= 0) throw ValidationError("sample_crop: m must be positive");

  CropPlan plan;
  plan.n = n;
  if (m >= n) {
    // Exhaustive window: the identity plan, no randomness consumed.
    plan.indices.resize(static_cast<size_t>(n));
    std::iota(plan.indices.begin(), plan.indices.end(), 0);
    return plan;
  }

  // Partial Fisher-Yates: the first m slots end up a uniform without-
  // replacement sample.
  std::vector<int> pool(static_cast<size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < m; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
  }
  plan.indices.assign(pool.begin(), pool.begin() + m);
  std::sort(plan.indices.begin(), plan.indices.end());
  return plan;
}

std::pair<RelationshipTensor, LabelMatrix> apply_crop(const RelationshipTensor& tensor,
                                                      const LabelMatrix& labels,
                                                      const CropPlan& plan) {
  check_plan(plan);
  if (tensor.n != plan.n || labels.n != plan.n) {
    throw ValidationError("apply_crop: plan is for size " + std::to_string(plan.n) +
                          " but tensor is " + std::to_string(tensor.n) + " and labels are " +
                          std::to_string(labels.n));
  }
  const int m = plan.m();
  RelationshipTensor sub = RelationshipTensor::zeros(m, tensor.d);
  LabelMatrix sub_labels = LabelMatrix::filled(m, 0);
  for (int j = 0; j < m; ++j) {
    const int src_j = plan.indices[static_cast<size_t>(j)];
    for (int k = 0; k < m; ++k) {
      const int src_k = plan.indices[static_cast<size_t>(k)];
      const auto src = tensor.cell(src_j, src_k);
      auto dst = sub.cell(j, k);
      std::copy(src.begin(), src.end(), dst.begin());
      sub_labels.at(j, k) = labels.at(src_j, src_k);
    }
  }
  return {std::move(sub), std::move(sub_labels)};
}

CropPlan shuffle_ord(const CropPlan& plan, Rng& rng) {
  check_plan(plan);
  CropPlan out = plan;
  // Fisher-Yates over the plan's own indices.
  for (int i = out.m() - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(out.indices[static_cast<size_t>(i)], out.indices[static_cast<size_t>(j)]);
  }
  return out;
}

std::pair<RelationshipTensor, LabelMatrix> shuffle_rad(const RelationshipTensor& tensor,
                                                       const LabelMatrix& labels, int m,
                                                       Rng& rng) {
  if (tensor.n < 1 || labels.n != tensor.n) {
    throw ValidationError("shuffle_rad: tensor and labels must agree on a positive size");
  }
  if (m < 1) throw ValidationError("shuffle_rad: m must be positive");
  const int n = tensor.n;
  RelationshipTensor sub = RelationshipTensor::zeros(m, tensor.d);
  LabelMatrix sub_labels = LabelMatrix::filled(m, 0);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      const int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      const auto src = tensor.cell(a, b);
      auto dst = sub.cell(j, k);
      std::copy(src.begin(), src.end(), dst.begin());
      sub_labels.at(j, k) = labels.at(a, b);
    }
  }
  return {std::move(sub), std::move(sub_labels)};
}

nlohmann::ordered_json crop_plan_to_json(const CropPlan& plan) {
  nlohmann::ordered_json j;
  j["n"] = plan.n;
  j["indices"] = plan.indices;
  return j;
}

CropPlan crop_plan_from_json(const nlohmann::json& j) {
  CropPlan plan;
  try {
    plan.n = j.at("n").get<int>();
    plan.indices = j.at("indices").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("crop plan: ") + e.what());
  }
  check_plan(plan);
  return plan;
}

}  // namespace dmon
