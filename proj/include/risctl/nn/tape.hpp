#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "risctl/nn/tensor.hpp"

namespace risctl::nn {

// Recorded computation tape for exact reverse-mode differentiation.
//
// Ops append nodes in execution order, so the node list is already a
// topological order and backward() is a single reverse sweep. Operands are
// tensors, not scalars; each op carries a hand-written vector-Jacobian
// product. Forward evaluation uses fixed loop orders, so repeated runs on
// identical inputs are bitwise identical.
class Tape {
public:
    using Var = int;

    // Learnable leaf. Memoized per tape so an unrolled network shares one
    // node per parameter; after backward() the node gradient is accumulated
    // into p.grad.
    Var param(ParamTensor& p);

    // Non-learnable input; receives no gradient.
    Var constant(Tensor t);

    Var matmul(Var a, Var b);     // A * B
    Var matmul_nt(Var a, Var b);  // A * B^T
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);        // elementwise
    Var scale(Var a, double s);
    Var add_rowvec(Var a, Var bias);  // bias (1 x cols) broadcast over rows
    Var tanh(Var a);
    Var sigmoid(Var a);
    Var softmax_rows(Var a);
    Var concat_rows(Var a, Var b);
    Var concat_cols(Var a, Var b);
    Var slice_rows(Var a, int r0, int r1);  // rows [r0, r1)
    Var transpose(Var a);
    Var sum_all(Var a);                     // 1x1
    Var mean_all(Var a);                    // 1x1

    // Blockwise unit normalization of a (2N x 1) vector: each consecutive
    // 2-block is divided by its Euclidean norm. Throws SingularProjection
    // on a zero-norm block.
    Var block_normalize(Var x);

    // Blockwise removal of the radial component: out_n = xi_n - (x_n.xi_n) x_n.
    // Differentiable in both arguments.
    Var tangent_project(Var x, Var xi);

    // Per-block angle recovery: theta_n = atan2(x_{n,2}, x_{n,1}), wrapped
    // into [0, 2pi). Maps (2N x 1) -> (N x 1).
    Var atan2_blocks(Var x);

    // Mean squared error against a constant target.
    Var mse(Var pred, const Tensor& target);

    const Tensor& value(Var v) const { return nodes_[v].value; }
    const Tensor& grad(Var v) const { return nodes_[v].grad; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }

    // Seeds d(loss)=1 (loss must be 1x1), sweeps the tape in reverse and
    // accumulates leaf gradients into their ParamTensors.
    void backward(Var loss);

    void clear();

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&, Node&)> backward;
        ParamTensor* leaf = nullptr;
    };

    Var push(Tensor value, std::function<void(Tape&, Node&)> backward);
    Node& node(Var v) { return nodes_[v]; }

    std::vector<Node> nodes_;
    std::unordered_map<ParamTensor*, Var> param_vars_;
};

}  // namespace risctl::nn
