#pragma once

#include <string>
#include <utility>
#include <vector>

#include "risctl/common/rng.hpp"
#include "risctl/nn/tape.hpp"

namespace risctl::nn {

enum class Activation { identity, tanh };

// Fully connected layer, y = act(W x + b). Weights W are (out x in).
struct DenseLayer {
    ParamTensor w;
    ParamTensor b;
    Activation act = Activation::tanh;

    DenseLayer() = default;
    DenseLayer(const std::string& name, int in_dim, int out_dim,
               Activation a = Activation::tanh);

    int in_dim() const { return w.value.cols; }
    int out_dim() const { return w.value.rows; }
    void init(Rng& rng);
    std::vector<ParamTensor*> params();
};

// Column-vector input (in x 1) -> (out x 1).
Tape::Var dense_apply(Tape& tape, DenseLayer& layer, Tape::Var input);

// Row-major token matrix (t x in) -> (t x out); each row treated as one input.
Tape::Var dense_apply_rows(Tape& tape, DenseLayer& layer, Tape::Var rows);

// Single LSTM cell with packed gate order (input, forget, candidate, output).
// wx (4H x in), wh (4H x H), b (4H x 1).
struct LstmCell {
    ParamTensor wx;
    ParamTensor wh;
    ParamTensor b;

    LstmCell() = default;
    LstmCell(const std::string& name, int in_dim, int hidden);

    int in_dim() const { return wx.value.cols; }
    int hidden() const { return wh.value.cols; }
    void init(Rng& rng);
    std::vector<ParamTensor*> params();
};

struct LstmState {
    Tape::Var h;
    Tape::Var c;
};

// Standard gate equations:
//   i = sig(.), f = sig(.), g = tanh(.), o = sig(.)
//   c' = f.c + i.g ; h' = o.tanh(c')
// Returns (h', state'). Throws on non-finite state.
std::pair<Tape::Var, LstmState> lstm_step(Tape& tape, LstmCell& cell,
                                          Tape::Var input, LstmState state);

// Single-head self-attention over token rows with identity values:
//   A = softmax(Q K^T / sqrt(d)) X,  out = A + FF(A)
// where Q = X Wq^T, K = X Wk^T and FF is a one-hidden-layer tanh MLP.
// With a single token the attention weight is exactly 1, so
// out = token + FF(token). Output shape equals input shape.
struct AttentionBlock {
    ParamTensor wq;  // d x d
    ParamTensor wk;  // d x d
    ParamTensor w1;  // hidden x d
    ParamTensor b1;  // 1 x hidden
    ParamTensor w2;  // d x hidden
    ParamTensor b2;  // 1 x d

    AttentionBlock() = default;
    AttentionBlock(const std::string& name, int dim, int hidden = 256);

    int dim() const { return wq.value.rows; }
    int hidden() const { return w1.value.rows; }
    void init(Rng& rng);
    std::vector<ParamTensor*> params();
};

Tape::Var attention_block_apply(Tape& tape, AttentionBlock& block,
                                Tape::Var tokens);

// Sinusoidal embedding of an integer step index, (dim x 1).
Tensor time_embedding(int step, int dim);

// Uniform init in +-1/sqrt(fan_in); biases zero.
void init_uniform(ParamTensor& p, int fan_in, Rng& rng);

}  // namespace risctl::nn
