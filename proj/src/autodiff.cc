// Copyright 2026 The ehrgan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ehrgan/autodiff.h"

#include <cmath>

#include "ehrgan/errors.h"
#include "ehrgan/kernels.h"

namespace ehrgan::ad {
namespace {

Tape& tape_of(const Var& a) {
  if (!a.valid()) throw ContractError("operation on an unbound Var");
  return *a.tape();
}

Tape& tape_of(const Var& a, const Var& b) {
  Tape& t = tape_of(a);
  if (b.tape() != &t) throw ContractError("operands live on different tapes");
  return t;
}

void require_same_shape(const char* what, const Var& a, const Var& b) {
  if (!a.value().same_shape(b.value())) {
    throw DimensionError(std::string(what) + ": shape mismatch " +
                         a.value().shape_string() + " vs " +
                         b.value().shape_string());
  }
}

template <typename F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.rows(), a.cols());
  const double* x = a.data();
  double* y = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = f(x[i]);
  return out;
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, F f) {
  Tensor out(a.rows(), a.cols());
  const double* x = a.data();
  const double* z = b.data();
  double* y = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = f(x[i], z[i]);
  return out;
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kMatMul: return "matmul";
    case Op::kMatMulNT: return "matmul_nt";
    case Op::kMatMulTN: return "matmul_tn";
    case Op::kAddBias: return "add_bias";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
    case Op::kScale: return "scale";
    case Op::kAddScalar: return "add_scalar";
    case Op::kRelu: return "relu";
    case Op::kSigmoid: return "sigmoid";
    case Op::kSoftplus: return "softplus";
    case Op::kLog: return "log";
    case Op::kSqrt: return "sqrt";
    case Op::kSquare: return "square";
    case Op::kReciprocal: return "reciprocal";
    case Op::kSum: return "sum";
    case Op::kSumRows: return "sum_rows";
    case Op::kSumCols: return "sum_cols";
    case Op::kBroadcastScalar: return "broadcast_scalar";
    case Op::kBroadcastRows: return "broadcast_rows";
    case Op::kBroadcastCols: return "broadcast_cols";
  }
  return "?";
}

const Tensor& Var::value() const {
  if (!valid()) throw ContractError("value() on an unbound Var");
  return tape_->value(id_);
}

Var Tape::leaf(Tensor value) {
  Node n;
  n.value = std::make_shared<const Tensor>(std::move(value));
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::leaf_ref(const Tensor& value) {
  Node n;
  // Non-owning alias: the caller guarantees `value` outlives the tape.
  n.value = std::shared_ptr<const Tensor>(std::shared_ptr<const Tensor>(), &value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Op op, Tensor value, int in0, int in1, double scalar) {
  Node n;
  n.op = op;
  n.in0 = in0;
  n.in1 = in1;
  n.scalar = scalar;
  n.value = std::make_shared<const Tensor>(std::move(value));
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::mark_needed(int top, std::span<const Var> wrt) {
  // Backprop is pruned to nodes that depend on some element of `wrt`.
  needs_.assign(top + 1, 0);
  for (const Var& w : wrt) {
    if (w.id() <= top) needs_[w.id()] = 1;
  }
  for (int i = 0; i <= top; ++i) {
    const Node& n = nodes_[i];
    if ((n.in0 >= 0 && needs_[n.in0]) || (n.in1 >= 0 && needs_[n.in1])) {
      needs_[i] = 1;
    }
  }
}

std::vector<Var> Tape::gradients(Var output, std::span<const Var> wrt) {
  if (!owns(output)) throw ContractError("gradients: output is not on this tape");
  const Tensor& out_value = value(output.id());
  if (out_value.rows() != 1 || out_value.cols() != 1) {
    throw ContractError("gradients: output must be a 1x1 scalar, got " +
                        out_value.shape_string());
  }
  for (const Var& w : wrt) {
    if (!owns(w)) throw ContractError("gradients: input is not on this tape");
  }

  const int top = output.id();
  mark_needed(top, wrt);
  std::vector<Var> adjoint(top + 1);
  if (needs_[top]) {
    adjoint[top] = leaf(Tensor::Scalar(1.0));
    for (int i = top; i >= 0; --i) {
      if (!adjoint[i].valid() || nodes_[i].op == Op::kLeaf) continue;
      backprop_node(i, adjoint);
    }
  }

  std::vector<Var> result;
  result.reserve(wrt.size());
  for (const Var& w : wrt) {
    if (w.id() <= top && adjoint[w.id()].valid()) {
      result.push_back(adjoint[w.id()]);
    } else {
      const Tensor& v = value(w.id());
      result.push_back(leaf(Tensor(v.rows(), v.cols())));
    }
  }
  return result;
}

std::vector<GradientFactors> Tape::factored_gradients(Var output, std::span<const Var> wrt) {
  if (!owns(output)) throw ContractError("factored_gradients: output is not on this tape");
  if (value(output.id()).size() != 1) {
    throw ContractError("factored_gradients: output must be a 1x1 scalar");
  }
  const int top = output.id();
  std::vector<GradientFactors> result(wrt.size());
  factor_slot_.assign(top + 1, -1);
  for (std::size_t k = 0; k < wrt.size(); ++k) {
    const Var& w = wrt[k];
    if (!owns(w) || op(w.id()) != Op::kLeaf) {
      throw ContractError("factored_gradients: inputs must be leaves on this tape");
    }
    if (w.id() <= top) factor_slot_[w.id()] = static_cast<int>(k);
  }
  mark_needed(top, wrt);
  std::vector<Var> adjoint(top + 1);
  factors_ = &result;
  try {
    if (needs_[top]) {
      adjoint[top] = leaf(Tensor::Scalar(1.0));
      for (int i = top; i >= 0; --i) {
        if (!adjoint[i].valid() || nodes_[i].op == Op::kLeaf) continue;
        backprop_node(i, adjoint);
      }
    }
  } catch (...) {
    factors_ = nullptr;
    throw;
  }
  factors_ = nullptr;
  return result;
}

void Tape::backprop_node(int id, std::vector<Var>& adjoint) {
  // Copy what we need: recording new nodes may reallocate nodes_.
  const Op op = nodes_[id].op;
  const int i0 = nodes_[id].in0;
  const int i1 = nodes_[id].in1;
  const double s = nodes_[id].scalar;
  const Var g = adjoint[id];
  const Var y(this, id);
  const Var a(this, i0);
  const Var b(this, i1);

  auto accumulate = [&](int target, Var contrib) {
    if (adjoint[target].valid()) {
      adjoint[target] = add(adjoint[target], contrib);
    } else {
      adjoint[target] = contrib;
    }
  };
  auto wants = [&](int target) { return target >= 0 && needs_[target]; };

  if (factors_ != nullptr) {
    auto slot = [&](int target) { return wants(target) ? factor_slot_[target] : -1; };
    const int f0 = slot(i0);
    const int f1 = slot(i1);
    if (f0 >= 0 || f1 >= 0) {
      if (f0 >= 0) {
        throw ContractError(std::string("factored_gradients: parameter used as left operand of ") +
                            op_name(op));
      }
      GradientFactors& out = (*factors_)[f1];
      switch (op) {
        case Op::kMatMul:
          out.outer.emplace_back(a, g);
          if (wants(i0)) accumulate(i0, matmul_nt(g, b));
          return;
        case Op::kMatMulNT:
          out.outer.emplace_back(g, a);
          if (wants(i0)) accumulate(i0, matmul(g, b));
          return;
        case Op::kAddBias:
          out.rows.push_back(g);
          if (wants(i0)) accumulate(i0, g);
          return;
        default:
          throw ContractError(std::string("factored_gradients: unsupported use of a parameter in ") +
                              op_name(op));
      }
    }
  }

  switch (op) {
    case Op::kLeaf:
      break;
    case Op::kMatMul:
      if (wants(i0)) accumulate(i0, matmul_nt(g, b));
      if (wants(i1)) accumulate(i1, matmul_tn(a, g));
      break;
    case Op::kMatMulNT:
      if (wants(i0)) accumulate(i0, matmul(g, b));
      if (wants(i1)) accumulate(i1, matmul_tn(g, a));
      break;
    case Op::kMatMulTN:
      if (wants(i0)) accumulate(i0, matmul_nt(b, g));
      if (wants(i1)) accumulate(i1, matmul(a, g));
      break;
    case Op::kAddBias:
      if (wants(i0)) accumulate(i0, g);
      if (wants(i1)) accumulate(i1, sum_rows(g));
      break;
    case Op::kAdd:
      if (wants(i0)) accumulate(i0, g);
      if (wants(i1)) accumulate(i1, g);
      break;
    case Op::kSub:
      if (wants(i0)) accumulate(i0, g);
      if (wants(i1)) accumulate(i1, scale(g, -1.0));
      break;
    case Op::kMul:
      if (wants(i0)) accumulate(i0, mul(g, b));
      if (wants(i1)) accumulate(i1, mul(g, a));
      break;
    case Op::kDiv:
      if (wants(i0)) accumulate(i0, div(g, b));
      if (wants(i1)) accumulate(i1, scale(div(mul(g, y), b), -1.0));
      break;
    case Op::kScale:
      if (wants(i0)) accumulate(i0, scale(g, s));
      break;
    case Op::kAddScalar:
      if (wants(i0)) accumulate(i0, g);
      break;
    case Op::kRelu:
      if (wants(i0)) {
        Var mask = leaf(map(a.value(), [](double x) { return x > 0.0 ? 1.0 : 0.0; }));
        accumulate(i0, mul(g, mask));
      }
      break;
    case Op::kSigmoid:
      if (wants(i0)) accumulate(i0, mul(g, mul(y, one_minus(y))));
      break;
    case Op::kSoftplus:
      if (wants(i0)) accumulate(i0, mul(g, sigmoid(a)));
      break;
    case Op::kLog:
      if (wants(i0)) accumulate(i0, div(g, a));
      break;
    case Op::kSqrt:
      if (wants(i0)) accumulate(i0, mul(g, scale(reciprocal(y), 0.5)));
      break;
    case Op::kSquare:
      if (wants(i0)) accumulate(i0, mul(g, scale(a, 2.0)));
      break;
    case Op::kReciprocal:
      if (wants(i0)) accumulate(i0, scale(mul(g, square(y)), -1.0));
      break;
    case Op::kSum:
      if (wants(i0)) accumulate(i0, broadcast_scalar(g, a.rows(), a.cols()));
      break;
    case Op::kSumRows:
      if (wants(i0)) accumulate(i0, broadcast_rows(g, a.rows()));
      break;
    case Op::kSumCols:
      if (wants(i0)) accumulate(i0, broadcast_cols(g, a.cols()));
      break;
    case Op::kBroadcastScalar:
      if (wants(i0)) accumulate(i0, sum(g));
      break;
    case Op::kBroadcastRows:
      if (wants(i0)) accumulate(i0, sum_rows(g));
      break;
    case Op::kBroadcastCols:
      if (wants(i0)) accumulate(i0, sum_cols(g));
      break;
  }
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  return t.record(Op::kMatMul, kernels::matmul(a.value(), b.value()), a.id(), b.id());
}

Var matmul_nt(Var a, Var b) {
  Tape& t = tape_of(a, b);
  return t.record(Op::kMatMulNT, kernels::matmul_nt(a.value(), b.value()), a.id(),
                  b.id());
}

Var matmul_tn(Var a, Var b) {
  Tape& t = tape_of(a, b);
  return t.record(Op::kMatMulTN, kernels::matmul_tn(a.value(), b.value()), a.id(),
                  b.id());
}

Var add_bias(Var x, Var bias) {
  Tape& t = tape_of(x, bias);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw DimensionError("add_bias: bias " + bv.shape_string() +
                         " does not match input " + xv.shape_string());
  }
  Tensor out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double* row = out.data() + r * out.cols();
    for (std::size_t c = 0; c < out.cols(); ++c) row[c] += bv[c];
  }
  return t.record(Op::kAddBias, std::move(out), x.id(), bias.id());
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("add", a, b);
  return t.record(Op::kAdd, zip(a.value(), b.value(), [](double x, double y) { return x + y; }),
                  a.id(), b.id());
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("sub", a, b);
  return t.record(Op::kSub, zip(a.value(), b.value(), [](double x, double y) { return x - y; }),
                  a.id(), b.id());
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("mul", a, b);
  return t.record(Op::kMul, zip(a.value(), b.value(), [](double x, double y) { return x * y; }),
                  a.id(), b.id());
}

Var div(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("div", a, b);
  for (double v : b.value().values()) {
    if (v == 0.0) throw DomainError("div: division by zero");
  }
  return t.record(Op::kDiv, zip(a.value(), b.value(), [](double x, double y) { return x / y; }),
                  a.id(), b.id());
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  return t.record(Op::kScale, map(a.value(), [s](double x) { return x * s; }), a.id(), -1, s);
}

Var add_scalar(Var a, double s) {
  Tape& t = tape_of(a);
  return t.record(Op::kAddScalar, map(a.value(), [s](double x) { return x + s; }), a.id(), -1,
                  s);
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  return t.record(Op::kRelu, map(a.value(), [](double x) { return x > 0.0 ? x : 0.0; }),
                  a.id());
}

Var sigmoid(Var a) {
  Tape& t = tape_of(a);
  return t.record(Op::kSigmoid, map(a.value(), stable_sigmoid), a.id());
}

Var softplus(Var a) {
  Tape& t = tape_of(a);
  return t.record(Op::kSoftplus, map(a.value(), stable_softplus), a.id());
}

Var log(Var a) {
  Tape& t = tape_of(a);
  for (double v : a.value().values()) {
    if (!(v > 0.0)) throw DomainError("log: non-positive input " + std::to_string(v));
  }
  return t.record(Op::kLog, map(a.value(), [](double x) { return std::log(x); }), a.id());
}

Var sqrt(Var a) {
  Tape& t = tape_of(a);
  for (double v : a.value().values()) {
    if (v < 0.0) throw DomainError("sqrt: negative input " + std::to_string(v));
  }
  return t.record(Op::kSqrt, map(a.value(), [](double x) { return std::sqrt(x); }), a.id());
}

Var square(Var a) {
  Tape& t = tape_of(a);
  return t.record(Op::kSquare, map(a.value(), [](double x) { return x * x; }), a.id());
}

Var reciprocal(Var a) {
  Tape& t = tape_of(a);
  return t.record(Op::kReciprocal,
                  map(a.value(), [](double x) { return x == 0.0 ? 0.0 : 1.0 / x; }), a.id());
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return t.record(Op::kSum, Tensor::Scalar(s), a.id());
}

Var sum_rows(Var a) {
  Tape& t = tape_of(a);
  const Tensor& v = a.value();
  Tensor out(1, v.cols());
  for (std::size_t r = 0; r < v.rows(); ++r) {
    const double* row = v.data() + r * v.cols();
    for (std::size_t c = 0; c < v.cols(); ++c) out[c] += row[c];
  }
  return t.record(Op::kSumRows, std::move(out), a.id());
}

Var sum_cols(Var a) {
  Tape& t = tape_of(a);
  const Tensor& v = a.value();
  Tensor out(v.rows(), 1);
  for (std::size_t r = 0; r < v.rows(); ++r) {
    double s = 0.0;
    const double* row = v.data() + r * v.cols();
    for (std::size_t c = 0; c < v.cols(); ++c) s += row[c];
    out[r] = s;
  }
  return t.record(Op::kSumCols, std::move(out), a.id());
}

Var broadcast_scalar(Var s, std::size_t rows, std::size_t cols) {
  Tape& t = tape_of(s);
  return t.record(Op::kBroadcastScalar, Tensor(rows, cols, s.value().item()), s.id());
}

Var broadcast_rows(Var r, std::size_t rows) {
  Tape& t = tape_of(r);
  const Tensor& v = r.value();
  if (v.rows() != 1) throw DimensionError("broadcast_rows: expected a 1 x m row");
  Tensor out(rows, v.cols());
  for (std::size_t i = 0; i < rows; ++i) {
    std::copy(v.data(), v.data() + v.cols(), out.data() + i * v.cols());
  }
  return t.record(Op::kBroadcastRows, std::move(out), r.id());
}

Var broadcast_cols(Var c, std::size_t cols) {
  Tape& t = tape_of(c);
  const Tensor& v = c.value();
  if (v.cols() != 1) throw DimensionError("broadcast_cols: expected an n x 1 column");
  Tensor out(v.rows(), cols);
  for (std::size_t i = 0; i < v.rows(); ++i) {
    std::fill(out.data() + i * cols, out.data() + (i + 1) * cols, v[i]);
  }
  return t.record(Op::kBroadcastCols, std::move(out), c.id());
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var one_minus(Var a) { return add_scalar(scale(a, -1.0), 1.0); }

Var row_norms(Var a) { return sqrt(sum_cols(square(a))); }

}  // namespace ehrgan::ad
