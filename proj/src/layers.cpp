#include "risctl/nn/layers.hpp"

#include <cmath>

namespace risctl::nn {

void init_uniform(ParamTensor& p, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : p.value.data) v = rng.uniform(-bound, bound);
    p.zero_grad();
}

DenseLayer::DenseLayer(const std::string& name, int in_dim, int out_dim,
                       Activation a)
    : w(name + ".w", out_dim, in_dim), b(name + ".b", out_dim, 1), act(a) {
    require(in_dim > 0 && out_dim > 0, "DenseLayer: dims must be positive");
}

void DenseLayer::init(Rng& rng) { init_uniform(w, in_dim(), rng); b.zero_grad(); }

std::vector<ParamTensor*> DenseLayer::params() { return {&w, &b}; }

Tape::Var dense_apply(Tape& tape, DenseLayer& layer, Tape::Var input) {
    require(tape.value(input).rows == layer.in_dim() &&
                tape.value(input).cols == 1,
            "dense_apply: input length != in_dim");
    require(layer.w.value.all_finite() && layer.b.value.all_finite(),
            "dense_apply: non-finite parameters");
    Tape::Var z = tape.add(tape.matmul(tape.param(layer.w), input),
                           tape.param(layer.b));
    return layer.act == Activation::tanh ? tape.tanh(z) : z;
}

Tape::Var dense_apply_rows(Tape& tape, DenseLayer& layer, Tape::Var rows) {
    require(tape.value(rows).cols == layer.in_dim(),
            "dense_apply_rows: row width != in_dim");
    Tape::Var z = tape.matmul_nt(rows, tape.param(layer.w));
    // broadcast the (out x 1) bias over rows: ones (t x 1) * b^T
    Tensor ones(tape.value(rows).rows, 1);
    ones.fill(1.0);
    Tape::Var bb = tape.matmul_nt(tape.constant(ones), tape.param(layer.b));
    z = tape.add(z, bb);
    return layer.act == Activation::tanh ? tape.tanh(z) : z;
}

LstmCell::LstmCell(const std::string& name, int in_dim, int hidden)
    : wx(name + ".wx", 4 * hidden, in_dim),
      wh(name + ".wh", 4 * hidden, hidden),
      b(name + ".b", 4 * hidden, 1) {
    require(in_dim > 0 && hidden > 0, "LstmCell: dims must be positive");
}

void LstmCell::init(Rng& rng) {
    init_uniform(wx, in_dim(), rng);
    init_uniform(wh, hidden(), rng);
    b.zero_grad();
    b.value.fill(0.0);
}

std::vector<ParamTensor*> LstmCell::params() { return {&wx, &wh, &b}; }

std::pair<Tape::Var, LstmState> lstm_step(Tape& tape, LstmCell& cell,
                                          Tape::Var input, LstmState state) {
    const int H = cell.hidden();
    require(tape.value(input).rows == cell.in_dim(), "lstm_step: bad input dim");
    require(tape.value(state.h).rows == H && tape.value(state.c).rows == H,
            "lstm_step: bad state dim");
    require(tape.value(state.h).all_finite() && tape.value(state.c).all_finite(),
            "lstm_step: non-finite state");

    Tape::Var z = tape.add(tape.add(tape.matmul(tape.param(cell.wx), input),
                                    tape.matmul(tape.param(cell.wh), state.h)),
                           tape.param(cell.b));
    Tape::Var i = tape.sigmoid(tape.slice_rows(z, 0, H));
    Tape::Var f = tape.sigmoid(tape.slice_rows(z, H, 2 * H));
    Tape::Var g = tape.tanh(tape.slice_rows(z, 2 * H, 3 * H));
    Tape::Var o = tape.sigmoid(tape.slice_rows(z, 3 * H, 4 * H));
    Tape::Var c_new = tape.add(tape.mul(f, state.c), tape.mul(i, g));
    Tape::Var h_new = tape.mul(o, tape.tanh(c_new));
    return {h_new, LstmState{h_new, c_new}};
}

AttentionBlock::AttentionBlock(const std::string& name, int dim, int hidden)
    : wq(name + ".wq", dim, dim),
      wk(name + ".wk", dim, dim),
      w1(name + ".w1", hidden, dim),
      b1(name + ".b1", 1, hidden),
      w2(name + ".w2", dim, hidden),
      b2(name + ".b2", 1, dim) {
    require(dim > 0 && hidden > 0, "AttentionBlock: dims must be positive");
}

void AttentionBlock::init(Rng& rng) {
    init_uniform(wq, dim(), rng);
    init_uniform(wk, dim(), rng);
    init_uniform(w1, dim(), rng);
    init_uniform(w2, hidden(), rng);
    b1.zero_grad();
    b2.zero_grad();
}

std::vector<ParamTensor*> AttentionBlock::params() {
    return {&wq, &wk, &w1, &b1, &w2, &b2};
}

Tape::Var attention_block_apply(Tape& tape, AttentionBlock& block,
                                Tape::Var tokens) {
    const Tensor& X = tape.value(tokens);
    require(X.rows >= 1, "attention_block_apply: empty token sequence");
    require(X.cols == block.dim(), "attention_block_apply: token width != dim");

    Tape::Var q = tape.matmul_nt(tokens, tape.param(block.wq));
    Tape::Var k = tape.matmul_nt(tokens, tape.param(block.wk));
    Tape::Var scores =
        tape.scale(tape.matmul_nt(q, k), 1.0 / std::sqrt(double(block.dim())));
    Tape::Var attn = tape.matmul(tape.softmax_rows(scores), tokens);

    Tape::Var hidden = tape.tanh(tape.add_rowvec(
        tape.matmul_nt(attn, tape.param(block.w1)), tape.param(block.b1)));
    Tape::Var ff = tape.add_rowvec(tape.matmul_nt(hidden, tape.param(block.w2)),
                                   tape.param(block.b2));
    return tape.add(attn, ff);
}

Tensor time_embedding(int step, int dim) {
    require(dim > 0 && dim % 2 == 0, "time_embedding: dim must be even");
    Tensor out(dim, 1);
    for (int i = 0; i < dim / 2; ++i) {
        const double freq = std::pow(10000.0, -2.0 * i / dim);
        out.data[2 * i] = std::sin(step * freq);
        out.data[2 * i + 1] = std::cos(step * freq);
    }
    return out;
}

}  // namespace risctl::nn
