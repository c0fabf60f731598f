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

// Reverse-mode automatic differentiation over 2-D tensors.
//
// A Tape is an append-only list of nodes. Every node stores its value and the
// ids of its inputs, which always precede it. `Tape::gradients` walks the
// nodes in reverse and expresses each vector-Jacobian product with the same
// recorded primitives, so the gradients it returns are themselves tape nodes
// and can be differentiated again (this is what the gradient penalty needs).
//
// Conventions:
//   * relu'(0) = 0.
//   * reciprocal(0) = 0, which makes sqrt'(0) = 0 instead of +inf.
//   * Only bias-style broadcasting exists (`add_bias`); all other binary ops
//     require identical shapes.

#ifndef EHRGAN_AUTODIFF_H_
#define EHRGAN_AUTODIFF_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ehrgan/tensor.h"

namespace ehrgan::ad {

class Tape;

// Lightweight handle to a tape node.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr && id_ >= 0; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

enum class Op : std::uint8_t {
  kLeaf,
  kMatMul,
  kMatMulNT,
  kMatMulTN,
  kAddBias,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kScale,
  kAddScalar,
  kRelu,
  kSigmoid,
  kSoftplus,
  kLog,
  kSqrt,
  kSquare,
  kReciprocal,
  kSum,
  kSumRows,
  kSumCols,
  kBroadcastScalar,
  kBroadcastRows,
  kBroadcastCols,
};

const char* op_name(Op op);

// Gradient of a batch objective with respect to one parameter, kept as
// row-aligned factors: the full gradient is sum_k left_k^T right_k (weights)
// or sum_k sum_rows(rows_k) (biases), and row r of every factor comes from
// example r alone. Example r's own gradient is therefore available without
// a separate backward pass.
struct GradientFactors {
  std::vector<std::pair<Var, Var>> outer;
  std::vector<Var> rows;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf owning its value.
  Var leaf(Tensor value);
  // Leaf borrowing `value`, which must outlive the tape. Used for parameters
  // so per-example tapes do not copy the weights.
  Var leaf_ref(const Tensor& value);

  std::size_t size() const { return nodes_.size(); }
  Op op(int id) const { return nodes_.at(id).op; }
  const Tensor& value(int id) const { return *nodes_.at(id).value; }
  bool owns(const Var& v) const {
    return v.tape_ == this && v.id_ >= 0 &&
           static_cast<std::size_t>(v.id_) < nodes_.size();
  }

  // d output / d wrt[i] for every i. `output` must be 1x1. Inputs that the
  // output does not depend on get exact zeros. The returned Vars live on this
  // tape and are differentiable.
  std::vector<Var> gradients(Var output, std::span<const Var> wrt);

  // Like `gradients`, but contributions to each `wrt` leaf are returned as
  // factors instead of being summed. Every `wrt` leaf may only be used as the
  // right operand of matmul / matmul_nt or as the bias of add_bias, and the
  // objective must keep rows independent up to a final reduction.
  std::vector<GradientFactors> factored_gradients(Var output, std::span<const Var> wrt);

  // Internal: append a computed node.
  Var record(Op op, Tensor value, int in0 = -1, int in1 = -1, double scalar = 0.0);

 private:
  struct Node {
    Op op = Op::kLeaf;
    int in0 = -1;
    int in1 = -1;
    double scalar = 0.0;
    std::shared_ptr<const Tensor> value;
  };

  void mark_needed(int top, std::span<const Var> wrt);
  void backprop_node(int id, std::vector<Var>& adjoint);

  std::vector<Node> nodes_;
  // Scratch for gradients(): node depends on a differentiation target.
  std::vector<char> needs_;
  // Scratch for factored_gradients(): node id -> slot in factors_, or -1.
  std::vector<int> factor_slot_;
  std::vector<GradientFactors>* factors_ = nullptr;
};

// Primitives. Both operands must live on the same tape.
Var matmul(Var a, Var b);     // a * b
Var matmul_nt(Var a, Var b);  // a * b^T
Var matmul_tn(Var a, Var b);  // a^T * b
Var add_bias(Var x, Var bias);  // x[n x m] + bias[1 x m] on every row
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var relu(Var a);
Var sigmoid(Var a);
Var softplus(Var a);  // log(1 + e^x)
Var log(Var a);
Var sqrt(Var a);
Var square(Var a);
Var reciprocal(Var a);
Var sum(Var a);                                    // -> 1 x 1
Var sum_rows(Var a);                               // -> 1 x cols
Var sum_cols(Var a);                               // -> rows x 1
Var broadcast_scalar(Var s, std::size_t rows, std::size_t cols);
Var broadcast_rows(Var r, std::size_t rows);       // 1 x m -> rows x m
Var broadcast_cols(Var c, std::size_t cols);       // n x 1 -> n x cols

// Composites.
Var mean(Var a);
Var one_minus(Var a);
Var row_norms(Var a);  // Euclidean norm of each row, rows x 1

}  // namespace ehrgan::ad

#endif  // EHRGAN_AUTODIFF_H_
