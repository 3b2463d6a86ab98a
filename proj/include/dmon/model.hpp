#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dmon/tensor.hpp"

namespace dmon {

// The head branch convolves rows of the relationship tensor (shared head
// argument per row); the tail branch convolves columns.
enum class Branch { head, tail };

inline const char* branch_name(Branch b) { return b == Branch::head ? "head" : "tail"; }

// ---------------------------------------------------------------------------
// 1-D convolution, stride 1, symmetric zero padding, odd kernel only (the
// residual add requires length-preserving layers).
// ---------------------------------------------------------------------------

struct Conv1d {
  int in_ch = 0;
  int out_ch = 0;
  int k = 0;
  std::vector<double> w;  // [out][in][k]
  std::vector<double> b;  // [out]

  static Conv1d zeros(int in_ch, int out_ch, int k);

  double& wat(int co, int ci, int dk) {
    return w[(static_cast<size_t>(co) * in_ch + ci) * k + dk];
  }
  double wat(int co, int ci, int dk) const {
    return w[(static_cast<size_t>(co) * in_ch + ci) * k + dk];
  }
};

Seq conv1d_forward(const Conv1d& conv, const Seq& x);

// Accumulates into *dx and *grad; either may be null.
void conv1d_backward(const Conv1d& conv, const Seq& x, const Seq& dy, Seq* dx, Conv1d* grad);

struct Linear {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // [out][in]
  std::vector<double> b;  // [out]

  static Linear zeros(int in, int out);
};

// ---------------------------------------------------------------------------
// Multi-scale residual module
// ---------------------------------------------------------------------------

// Five length-preserving convolutions: two parallel stages over the input,
// two parallel stages over their concatenation, and a kernel-1 fusion conv
// whose output is added back to the input. Kernel sizes configure the five
// applications positionally; the default plan is {7, 5, 5, 3, 1}.
struct MsrmParams {
  Conv1d stage1_wide;    // d  -> d
  Conv1d stage1_narrow;  // d  -> d
  Conv1d stage2_wide;    // 2d -> d
  Conv1d stage2_narrow;  // 2d -> d
  Conv1d fuse;           // 2d -> d

  int feature_dim() const { return stage1_wide.in_ch; }
  std::array<int, 5> kernel_sizes() const {
    return {stage1_wide.k, stage1_narrow.k, stage2_wide.k, stage2_narrow.k, fuse.k};
  }
};

MsrmParams make_msrm(int d, std::array<int, 5> kernel_sizes);  // zero weights
MsrmParams zeros_like(const MsrmParams& p);

// Post-activation stage outputs plus the module output.
struct MsrmTrace {
  Seq stage1_wide;
  Seq stage1_narrow;
  Seq stage2_wide;
  Seq stage2_narrow;
  Seq output;
};

// Everything backward needs: input, pre-activations, and concatenated stage
// inputs, in addition to the trace.
struct MsrmWorkspace {
  Seq input;
  Seq pre1w, pre1n;  // pre-activation of stage 1
  Seq cat1;          // concat(stage1_wide, stage1_narrow), 2d channels
  Seq pre2w, pre2n;  // pre-activation of stage 2
  Seq cat2;          // concat(stage2_wide, stage2_narrow), 2d channels
  MsrmTrace trace;
};

// Returns the output; fills *trace when given. Throws NumericError naming the
// layer if an intermediate goes non-finite.
Seq msrm_forward(const Seq& input, const MsrmParams& params, MsrmTrace* trace = nullptr);

Seq msrm_forward_ws(const Seq& input, const MsrmParams& params, MsrmWorkspace& ws);

// Accumulates into *dinput and *grads; either may be null.
void msrm_backward(const MsrmParams& params, const MsrmWorkspace& ws, const Seq& doutput,
                   Seq* dinput, MsrmParams* grads);

// ---------------------------------------------------------------------------
// Dual-tower model
// ---------------------------------------------------------------------------

// Per-cell class scores from one branch.
struct BranchLogits {
  int m = 0;
  int l = 0;
  Branch branch = Branch::head;
  std::vector<double> values;  // (m, m, l) row-major

  static BranchLogits zeros(int m, int l, Branch branch);

  double& at(int i, int j, int c) {
    return values[(static_cast<size_t>(i) * m + j) * l + c];
  }
  double at(int i, int j, int c) const {
    return values[(static_cast<size_t>(i) * m + j) * l + c];
  }
  std::span<const double> cell(int i, int j) const {
    return {values.data() + (static_cast<size_t>(i) * m + j) * l, static_cast<size_t>(l)};
  }
  std::span<double> cell(int i, int j) {
    return {values.data() + (static_cast<size_t>(i) * m + j) * l, static_cast<size_t>(l)};
  }
};

// The two towers have independent parameters, each with its own per-cell
// classifier (shared across positions). msrm_bypass degrades the model to the
// classifiers applied to raw tensor cells, the pairwise baseline.
struct DmonParams {
  MsrmParams head_msrm;
  MsrmParams tail_msrm;
  Linear head_classifier;
  Linear tail_classifier;
  bool msrm_bypass = false;

  int feature_dim() const { return head_classifier.in; }
  int num_labels() const { return head_classifier.out; }

  struct TensorRef {
    std::string name;
    std::vector<double>* data;
    std::vector<int> shape;
  };
  // Stable enumeration of all parameter tensors; checkpoint and optimizer
  // order is defined by it.
  std::vector<TensorRef> tensors();
};

// Fan-in-scaled normal initialization (std sqrt(2 / fan_in) for conv weights
// ahead of ReLU, sqrt(1 / fan_in) for the classifiers), zero biases,
// deterministic given seed.
DmonParams init_params(int d, int l, std::array<int, 5> kernel_sizes, std::uint64_t seed);

DmonParams zeros_like(const DmonParams& p);

// One tower over the cropped tensor: per-row (head) or per-column (tail)
// MSRM, then the per-cell linear map d -> l.
BranchLogits branch_forward(const RelationshipTensor& sub, const MsrmParams& msrm,
                            const Linear& classifier, Branch branch, bool msrm_bypass = false);

std::pair<BranchLogits, BranchLogits> dmon_forward(const RelationshipTensor& sub,
                                                   const DmonParams& params);

// Training-time forward keeping per-sequence workspaces for backward. For the
// tail branch the workspaces are stored over the transposed tensor.
struct BranchWorkspace {
  std::vector<MsrmWorkspace> seqs;  // one per row (head) / column (tail)
  RelationshipTensor oriented;      // input, transposed for the tail branch
  bool bypass = false;
};

BranchLogits branch_forward_train(const RelationshipTensor& sub, const MsrmParams& msrm,
                                  const Linear& classifier, Branch branch, bool msrm_bypass,
                                  BranchWorkspace& ws);

// Backward from per-cell logit gradients; accumulates parameter gradients.
void branch_backward(const MsrmParams& msrm, const Linear& classifier, Branch branch,
                     const BranchWorkspace& ws, const BranchLogits& dlogits,
                     MsrmParams* msrm_grads, Linear* classifier_grads);

}  // namespace dmon
