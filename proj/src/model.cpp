#include "dmon/model.hpp"

#include <cmath>

#include "dmon/rng.hpp"

namespace dmon {

Conv1d Conv1d::zeros(int in_ch, int out_ch, int k) {
  if (in_ch <= 0 || out_ch <= 0) throw ValidationError("conv: channel widths must be positive");
  if (k < 1 || k % 2 == 0) {
    throw ValidationError("conv: kernel size " + std::to_string(k) +
                          " must be odd (same-length padding)");
  }
  Conv1d c;
  c.in_ch = in_ch;
  c.out_ch = out_ch;
  c.k = k;
  c.w.assign(static_cast<size_t>(out_ch) * in_ch * k, 0.0);
  c.b.assign(static_cast<size_t>(out_ch), 0.0);
  return c;
}

Seq conv1d_forward(const Conv1d& conv, const Seq& x) {
  if (x.ch != conv.in_ch) {
    throw ValidationError("conv: input has " + std::to_string(x.ch) + " channels, expected " +
                          std::to_string(conv.in_ch));
  }
  const int half = conv.k / 2;
  Seq y = Seq::zeros(x.len, conv.out_ch);
  for (int t = 0; t < x.len; ++t) {
    for (int co = 0; co < conv.out_ch; ++co) {
      double acc = conv.b[static_cast<size_t>(co)];
      for (int dk = 0; dk < conv.k; ++dk) {
        const int src = t + dk - half;
        if (src < 0 || src >= x.len) continue;  // zero padding
        const double* wrow = conv.w.data() + (static_cast<size_t>(co) * conv.in_ch) * conv.k + dk;
        for (int ci = 0; ci < conv.in_ch; ++ci) {
          acc += wrow[static_cast<size_t>(ci) * conv.k] * x.at(src, ci);
        }
      }
      y.at(t, co) = acc;
    }
  }
  return y;
}

void conv1d_backward(const Conv1d& conv, const Seq& x, const Seq& dy, Seq* dx, Conv1d* grad) {
  if (x.ch != conv.in_ch || dy.ch != conv.out_ch || dy.len != x.len) {
    throw ValidationError("conv backward: shape mismatch");
  }
  const int half = conv.k / 2;
  for (int t = 0; t < x.len; ++t) {
    for (int co = 0; co < conv.out_ch; ++co) {
      const double g = dy.at(t, co);
      if (g == 0.0) continue;
      if (grad != nullptr) grad->b[static_cast<size_t>(co)] += g;
      for (int dk = 0; dk < conv.k; ++dk) {
        const int src = t + dk - half;
        if (src < 0 || src >= x.len) continue;
        for (int ci = 0; ci < conv.in_ch; ++ci) {
          if (grad != nullptr) grad->wat(co, ci, dk) += g * x.at(src, ci);
          if (dx != nullptr) dx->at(src, ci) += g * conv.wat(co, ci, dk);
        }
      }
    }
  }
}

Linear Linear::zeros(int in, int out) {
  if (in <= 0 || out <= 0) throw ValidationError("linear: widths must be positive");
  Linear lin;
  lin.in = in;
  lin.out = out;
  lin.w.assign(static_cast<size_t>(out) * in, 0.0);
  lin.b.assign(static_cast<size_t>(out), 0.0);
  return lin;
}

// ---------------------------------------------------------------------------
// MSRM
// ---------------------------------------------------------------------------

MsrmParams make_msrm(int d, std::array<int, 5> kernel_sizes) {
  if (d <= 0) throw ValidationError("msrm: feature dimension must be positive");
  MsrmParams p;
  p.stage1_wide = Conv1d::zeros(d, d, kernel_sizes[0]);
  p.stage1_narrow = Conv1d::zeros(d, d, kernel_sizes[1]);
  p.stage2_wide = Conv1d::zeros(2 * d, d, kernel_sizes[2]);
  p.stage2_narrow = Conv1d::zeros(2 * d, d, kernel_sizes[3]);
  p.fuse = Conv1d::zeros(2 * d, d, kernel_sizes[4]);
  return p;
}

MsrmParams zeros_like(const MsrmParams& p) {
  return make_msrm(p.feature_dim(), p.kernel_sizes());
}

namespace {

void relu_into(const Seq& pre, Seq& post) {
  post = pre;
  for (double& x : post.v) x = x > 0.0 ? x : 0.0;
}

Seq concat_channels(const Seq& a, const Seq& b) {
  Seq out = Seq::zeros(a.len, a.ch + b.ch);
  for (int t = 0; t < a.len; ++t) {
    for (int c = 0; c < a.ch; ++c) out.at(t, c) = a.at(t, c);
    for (int c = 0; c < b.ch; ++c) out.at(t, a.ch + c) = b.at(t, c);
  }
  return out;
}

void check_finite(const Seq& s, const char* layer) {
  if (!s.all_finite()) {
    throw NumericError(std::string("non-finite activation after layer ") + layer);
  }
}

}  // namespace

Seq msrm_forward_ws(const Seq& input, const MsrmParams& params, MsrmWorkspace& ws) {
  if (input.ch != params.feature_dim()) {
    throw ValidationError("msrm: input has " + std::to_string(input.ch) +
                          " channels, expected " + std::to_string(params.feature_dim()));
  }
  if (input.len < 1) throw ValidationError("msrm: empty sequence");
  ws.input = input;

  ws.pre1w = conv1d_forward(params.stage1_wide, input);
  check_finite(ws.pre1w, "stage1_wide");
  relu_into(ws.pre1w, ws.trace.stage1_wide);

  ws.pre1n = conv1d_forward(params.stage1_narrow, input);
  check_finite(ws.pre1n, "stage1_narrow");
  relu_into(ws.pre1n, ws.trace.stage1_narrow);

  ws.cat1 = concat_channels(ws.trace.stage1_wide, ws.trace.stage1_narrow);

  ws.pre2w = conv1d_forward(params.stage2_wide, ws.cat1);
  check_finite(ws.pre2w, "stage2_wide");
  relu_into(ws.pre2w, ws.trace.stage2_wide);

  ws.pre2n = conv1d_forward(params.stage2_narrow, ws.cat1);
  check_finite(ws.pre2n, "stage2_narrow");
  relu_into(ws.pre2n, ws.trace.stage2_narrow);

  ws.cat2 = concat_channels(ws.trace.stage2_wide, ws.trace.stage2_narrow);

  Seq out = conv1d_forward(params.fuse, ws.cat2);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += input.v[i];  // residual
  check_finite(out, "fuse+residual");
  ws.trace.output = out;
  return out;
}

Seq msrm_forward(const Seq& input, const MsrmParams& params, MsrmTrace* trace) {
  MsrmWorkspace ws;
  Seq out = msrm_forward_ws(input, params, ws);
  if (trace != nullptr) *trace = std::move(ws.trace);
  return out;
}

void msrm_backward(const MsrmParams& params, const MsrmWorkspace& ws, const Seq& doutput,
                   Seq* dinput, MsrmParams* grads) {
  // Residual path.
  if (dinput != nullptr) {
    for (size_t i = 0; i < doutput.v.size(); ++i) dinput->v[i] += doutput.v[i];
  }

  Seq dcat2 = Seq::zeros(ws.cat2.len, ws.cat2.ch);
  conv1d_backward(params.fuse, ws.cat2, doutput, &dcat2, grads != nullptr ? &grads->fuse : nullptr);

  const int d = params.feature_dim();
  Seq dpre2w = Seq::zeros(doutput.len, d);
  Seq dpre2n = Seq::zeros(doutput.len, d);
  for (int t = 0; t < doutput.len; ++t) {
    for (int c = 0; c < d; ++c) {
      dpre2w.at(t, c) = ws.pre2w.at(t, c) > 0.0 ? dcat2.at(t, c) : 0.0;
      dpre2n.at(t, c) = ws.pre2n.at(t, c) > 0.0 ? dcat2.at(t, d + c) : 0.0;
    }
  }

  Seq dcat1 = Seq::zeros(ws.cat1.len, ws.cat1.ch);
  conv1d_backward(params.stage2_wide, ws.cat1, dpre2w, &dcat1,
                  grads != nullptr ? &grads->stage2_wide : nullptr);
  conv1d_backward(params.stage2_narrow, ws.cat1, dpre2n, &dcat1,
                  grads != nullptr ? &grads->stage2_narrow : nullptr);

  Seq dpre1w = Seq::zeros(doutput.len, d);
  Seq dpre1n = Seq::zeros(doutput.len, d);
  for (int t = 0; t < doutput.len; ++t) {
    for (int c = 0; c < d; ++c) {
      dpre1w.at(t, c) = ws.pre1w.at(t, c) > 0.0 ? dcat1.at(t, c) : 0.0;
      dpre1n.at(t, c) = ws.pre1n.at(t, c) > 0.0 ? dcat1.at(t, d + c) : 0.0;
    }
  }

  conv1d_backward(params.stage1_wide, ws.input, dpre1w, dinput,
                  grads != nullptr ? &grads->stage1_wide : nullptr);
  conv1d_backward(params.stage1_narrow, ws.input, dpre1n, dinput,
                  grads != nullptr ? &grads->stage1_narrow : nullptr);
}

// ---------------------------------------------------------------------------
// Dual-tower model
// ---------------------------------------------------------------------------

BranchLogits BranchLogits::zeros(int m, int l, Branch branch) {
  BranchLogits out;
  out.m = m;
  out.l = l;
  out.branch = branch;
  out.values.assign(static_cast<size_t>(m) * m * l, 0.0);
  return out;
}

std::vector<DmonParams::TensorRef> DmonParams::tensors() {
  std::vector<TensorRef> refs;
  auto add_conv = [&refs](const std::string& prefix, Conv1d& c) {
    refs.push_back({prefix + ".w", &c.w, {c.out_ch, c.in_ch, c.k}});
    refs.push_back({prefix + ".b", &c.b, {c.out_ch}});
  };
  auto add_msrm = [&](const std::string& prefix, MsrmParams& p) {
    add_conv(prefix + ".stage1_wide", p.stage1_wide);
    add_conv(prefix + ".stage1_narrow", p.stage1_narrow);
    add_conv(prefix + ".stage2_wide", p.stage2_wide);
    add_conv(prefix + ".stage2_narrow", p.stage2_narrow);
    add_conv(prefix + ".fuse", p.fuse);
  };
  add_msrm("head_msrm", head_msrm);
  add_msrm("tail_msrm", tail_msrm);
  refs.push_back({"head_classifier.w", &head_classifier.w,
                  {head_classifier.out, head_classifier.in}});
  refs.push_back({"head_classifier.b", &head_classifier.b, {head_classifier.out}});
  refs.push_back({"tail_classifier.w", &tail_classifier.w,
                  {tail_classifier.out, tail_classifier.in}});
  refs.push_back({"tail_classifier.b", &tail_classifier.b, {tail_classifier.out}});
  return refs;
}

DmonParams init_params(int d, int l, std::array<int, 5> kernel_sizes, std::uint64_t seed) {
  if (d <= 0 || l <= 0) throw ValidationError("init_params: d and l must be positive");
  DmonParams p;
  p.head_msrm = make_msrm(d, kernel_sizes);
  p.tail_msrm = make_msrm(d, kernel_sizes);
  p.head_classifier = Linear::zeros(d, l);
  p.tail_classifier = Linear::zeros(d, l);

  Rng rng(derive_seed(seed, "init"));
  auto fill_conv = [&rng](Conv1d& c) {
    const double std_dev = std::sqrt(2.0 / (static_cast<double>(c.in_ch) * c.k));
    for (double& x : c.w) x = rng.normal(0.0, std_dev);
    // biases stay zero
  };
  auto fill_linear = [&rng](Linear& lin) {
    const double std_dev = std::sqrt(1.0 / static_cast<double>(lin.in));
    for (double& x : lin.w) x = rng.normal(0.0, std_dev);
  };
  for (MsrmParams* msrm : {&p.head_msrm, &p.tail_msrm}) {
    fill_conv(msrm->stage1_wide);
    fill_conv(msrm->stage1_narrow);
    fill_conv(msrm->stage2_wide);
    fill_conv(msrm->stage2_narrow);
    fill_conv(msrm->fuse);
  }
  fill_linear(p.head_classifier);
  fill_linear(p.tail_classifier);
  return p;
}

DmonParams zeros_like(const DmonParams& p) {
  DmonParams z;
  z.head_msrm = zeros_like(p.head_msrm);
  z.tail_msrm = zeros_like(p.tail_msrm);
  z.head_classifier = Linear::zeros(p.head_classifier.in, p.head_classifier.out);
  z.tail_classifier = Linear::zeros(p.tail_classifier.in, p.tail_classifier.out);
  z.msrm_bypass = p.msrm_bypass;
  return z;
}

namespace {

void apply_classifier(const Linear& classifier, std::span<const double> feature,
                      std::span<double> logits) {
  for (int c = 0; c < classifier.out; ++c) {
    double acc = classifier.b[static_cast<size_t>(c)];
    const double* wrow = classifier.w.data() + static_cast<size_t>(c) * classifier.in;
    for (int i = 0; i < classifier.in; ++i) acc += wrow[i] * feature[static_cast<size_t>(i)];
    logits[static_cast<size_t>(c)] = acc;
  }
}

}  // namespace

BranchLogits branch_forward_train(const RelationshipTensor& sub, const MsrmParams& msrm,
                                  const Linear& classifier, Branch branch, bool msrm_bypass,
                                  BranchWorkspace& ws) {
  if (sub.d != classifier.in) {
    throw ValidationError("branch: tensor depth " + std::to_string(sub.d) +
                          " does not match classifier input " + std::to_string(classifier.in));
  }
  const int m = sub.n;
  ws.oriented = branch == Branch::head ? sub : transpose_pairs(sub);
  ws.bypass = msrm_bypass;
  ws.seqs.clear();

  BranchLogits logits = BranchLogits::zeros(m, classifier.out, branch);
  if (!msrm_bypass) ws.seqs.resize(static_cast<size_t>(m));
  for (int r = 0; r < m; ++r) {
    const Seq row = ws.oriented.row_seq(r);
    std::span<const double> features;
    const Seq* out_seq = nullptr;
    if (msrm_bypass) {
      out_seq = nullptr;
    } else {
      try {
        msrm_forward_ws(row, msrm, ws.seqs[static_cast<size_t>(r)]);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (" + branch_name(branch) + " branch, " +
                           (branch == Branch::head ? "row " : "column ") + std::to_string(r) + ")");
      }
      out_seq = &ws.seqs[static_cast<size_t>(r)].trace.output;
    }
    for (int p = 0; p < m; ++p) {
      features = out_seq != nullptr ? std::span<const double>(out_seq->step(p))
                                    : ws.oriented.cell(r, p);
      // Oriented (r, p) is (head, tail) for the head branch and (tail, head)
      // for the tail branch; logits are always stored as (head, tail).
      const int i = branch == Branch::head ? r : p;
      const int j = branch == Branch::head ? p : r;
      apply_classifier(classifier, features, logits.cell(i, j));
    }
  }
  return logits;
}

BranchLogits branch_forward(const RelationshipTensor& sub, const MsrmParams& msrm,
                            const Linear& classifier, Branch branch, bool msrm_bypass) {
  BranchWorkspace ws;
  return branch_forward_train(sub, msrm, classifier, branch, msrm_bypass, ws);
}

std::pair<BranchLogits, BranchLogits> dmon_forward(const RelationshipTensor& sub,
                                                   const DmonParams& params) {
  return {branch_forward(sub, params.head_msrm, params.head_classifier, Branch::head,
                         params.msrm_bypass),
          branch_forward(sub, params.tail_msrm, params.tail_classifier, Branch::tail,
                         params.msrm_bypass)};
}

void branch_backward(const MsrmParams& msrm, const Linear& classifier, Branch branch,
                     const BranchWorkspace& ws, const BranchLogits& dlogits,
                     MsrmParams* msrm_grads, Linear* classifier_grads) {
  const int m = dlogits.m;
  const int l = dlogits.l;
  for (int r = 0; r < m; ++r) {
    Seq dfeat = Seq::zeros(m, classifier.in);
    for (int p = 0; p < m; ++p) {
      const int i = branch == Branch::head ? r : p;
      const int j = branch == Branch::head ? p : r;
      const auto dcell = dlogits.cell(i, j);
      const std::span<const double> feat =
          ws.bypass ? ws.oriented.cell(r, p)
                    : std::span<const double>(ws.seqs[static_cast<size_t>(r)].trace.output.step(p));
      for (int c = 0; c < l; ++c) {
        const double g = dcell[static_cast<size_t>(c)];
        if (g == 0.0) continue;
        if (classifier_grads != nullptr) {
          classifier_grads->b[static_cast<size_t>(c)] += g;
          double* wrow = classifier_grads->w.data() + static_cast<size_t>(c) * classifier.in;
          for (int f = 0; f < classifier.in; ++f) wrow[f] += g * feat[static_cast<size_t>(f)];
        }
        const double* wrow = classifier.w.data() + static_cast<size_t>(c) * classifier.in;
        for (int f = 0; f < classifier.in; ++f) dfeat.at(p, f) += g * wrow[f];
      }
    }
    if (!ws.bypass && msrm_grads != nullptr) {
      msrm_backward(msrm, ws.seqs[static_cast<size_t>(r)], dfeat, nullptr, msrm_grads);
    }
  }
}

}  // namespace dmon
