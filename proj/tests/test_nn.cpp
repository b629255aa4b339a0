#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "risctl/nn/adam.hpp"
#include "risctl/nn/checkpoint.hpp"
#include "risctl/nn/layers.hpp"
#include "test_util.hpp"

using namespace risctl;
using namespace risctl::nn;

TEST_CASE("dense: identity weights pass the input through") {
    DenseLayer layer("d", 2, 2, Activation::identity);
    layer.w.value.at(0, 0) = 1.0;
    layer.w.value.at(1, 1) = 1.0;
    Tape tape;
    Tape::Var out = dense_apply(tape, layer, tape.constant(Tensor::column({1.0, 2.0})));
    CHECK(tape.value(out).data[0] == doctest::Approx(1.0));
    CHECK(tape.value(out).data[1] == doctest::Approx(2.0));
}

TEST_CASE("dense: zero weights yield the bias") {
    DenseLayer layer("d", 3, 1, Activation::identity);
    layer.b.value.data[0] = 3.0;
    Tape tape;
    Tape::Var out =
        dense_apply(tape, layer, tape.constant(Tensor::column({5.0, -1.0, 2.0})));
    CHECK(tape.value(out).data[0] == doctest::Approx(3.0));
}

TEST_CASE("dense: dimension mismatch raises a contract violation") {
    DenseLayer layer("d", 3, 2, Activation::identity);
    Tape tape;
    CHECK_THROWS_AS(
        dense_apply(tape, layer, tape.constant(Tensor::column({1.0, 2.0}))),
        ContractViolation);
}

TEST_CASE("dense: analytic gradient matches central differences") {
    Rng rng(7);
    DenseLayer layer("d", 3, 4, Activation::tanh);
    layer.init(rng);
    for (double& v : layer.b.value.data) v = rng.uniform(-0.3, 0.3);
    Tensor input = Tensor::column({0.3, -0.8, 0.5});

    auto params = layer.params();
    auto loss = [&] {
        Tape tape;
        return tape.value(tape.mean_all(dense_apply(tape, layer,
                                                    tape.constant(input))))
            .data[0];
    };
    auto grads = [&] {
        Tape tape;
        tape.backward(tape.mean_all(dense_apply(tape, layer, tape.constant(input))));
    };
    testutil::FdCheck fd;
    CHECK(fd.max_rel_error(params, loss, grads) < 1e-4);
}

TEST_CASE("lstm: zero network keeps zero state") {
    LstmCell cell("c", 2, 3);
    Tape tape;
    Tensor zero(3, 1);
    LstmState s{tape.constant(zero), tape.constant(zero)};
    auto [h, ns] =
        lstm_step(tape, cell, tape.constant(Tensor::column({1.0, -2.0})), s);
    for (double v : tape.value(ns.c).data) CHECK(v == doctest::Approx(0.0));
    for (double v : tape.value(h).data) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("lstm: saturated forget gate preserves the cell") {
    const int H = 4;
    LstmCell cell("c", 2, H);
    for (int i = 0; i < H; ++i) cell.b.value.data[H + i] = 50.0;  // forget bias
    Tensor c0(H, 1);
    for (int i = 0; i < H; ++i) c0.data[i] = 0.3 * (i + 1);
    Tape tape;
    LstmState s{tape.constant(Tensor(H, 1)), tape.constant(c0)};
    auto [h, ns] =
        lstm_step(tape, cell, tape.constant(Tensor::column({0.7, -0.1})), s);
    for (int i = 0; i < H; ++i)
        CHECK(std::fabs(tape.value(ns.c).data[i] - c0.data[i]) < 1e-9);
}

TEST_CASE("lstm: BPTT gradient over 3 steps matches finite differences") {
    Rng rng(11);
    LstmCell cell("c", 2, 3);
    cell.init(rng);
    std::vector<Tensor> inputs;
    for (int t = 0; t < 3; ++t) {
        Tensor x(2, 1);
        x.data = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        inputs.push_back(x);
    }
    auto run = [&](Tape& tape) {
        LstmState s{tape.constant(Tensor(3, 1)), tape.constant(Tensor(3, 1))};
        Tape::Var h = 0;
        for (const Tensor& x : inputs) {
            auto [out, ns] = lstm_step(tape, cell, tape.constant(x), s);
            s = ns;
            h = out;
        }
        return tape.mean_all(h);
    };
    auto params = cell.params();
    auto loss = [&] {
        Tape tape;
        return tape.value(run(tape)).data[0];
    };
    auto grads = [&] {
        Tape tape;
        tape.backward(run(tape));
    };
    testutil::FdCheck fd;
    CHECK(fd.max_rel_error(params, loss, grads) < 1e-4);
}

TEST_CASE("lstm: non-finite state is rejected") {
    LstmCell cell("c", 2, 3);
    Tape tape;
    Tensor bad(3, 1);
    bad.data[1] = std::nan("");
    LstmState s{tape.constant(bad), tape.constant(Tensor(3, 1))};
    CHECK_THROWS_AS(
        lstm_step(tape, cell, tape.constant(Tensor::column({1.0, 1.0})), s),
        ContractViolation);
}

TEST_CASE("attention: a single token attends only to itself") {
    Rng rng(3);
    AttentionBlock block("a", 4, 8);
    block.init(rng);
    Tensor token(1, 4);
    token.data = {0.5, -0.2, 0.9, 0.1};

    Tape tape;
    Tape::Var out = attention_block_apply(tape, block, tape.constant(token));

    // out = token + FF(token): recompute the feedforward by hand
    Tape tape2;
    Tape::Var t = tape2.constant(token);
    Tape::Var hidden = tape2.tanh(tape2.add_rowvec(
        tape2.matmul_nt(t, tape2.param(block.w1)), tape2.param(block.b1)));
    Tape::Var ff = tape2.add_rowvec(
        tape2.matmul_nt(hidden, tape2.param(block.w2)), tape2.param(block.b2));
    for (int c = 0; c < 4; ++c)
        CHECK(tape.value(out).at(0, c) ==
              doctest::Approx(token.at(0, c) + tape2.value(ff).at(0, c))
                  .epsilon(1e-12));
}

TEST_CASE("attention: identical tokens produce identical rows") {
    Rng rng(5);
    AttentionBlock block("a", 3, 6);
    block.init(rng);
    Tensor tokens(2, 3);
    for (int c = 0; c < 3; ++c) {
        tokens.at(0, c) = 0.3 * c - 0.2;
        tokens.at(1, c) = 0.3 * c - 0.2;
    }
    Tape tape;
    Tape::Var out = attention_block_apply(tape, block, tape.constant(tokens));
    for (int c = 0; c < 3; ++c)
        CHECK(tape.value(out).at(0, c) == doctest::Approx(tape.value(out).at(1, c)));
}

TEST_CASE("attention: empty token sequence is rejected") {
    AttentionBlock block("a", 3, 6);
    Tape tape;
    CHECK_THROWS_AS(attention_block_apply(tape, block, tape.constant(Tensor(0, 3))),
                    ContractViolation);
}

TEST_CASE("attention: gradient matches finite differences on 3 tokens") {
    Rng rng(13);
    AttentionBlock block("a", 4, 6);
    block.init(rng);
    Tensor tokens(3, 4);
    for (double& v : tokens.data) v = rng.uniform(-1, 1);

    auto params = block.params();
    auto loss = [&] {
        Tape tape;
        return tape
            .value(tape.mean_all(
                attention_block_apply(tape, block, tape.constant(tokens))))
            .data[0];
    };
    auto grads = [&] {
        Tape tape;
        tape.backward(tape.mean_all(
            attention_block_apply(tape, block, tape.constant(tokens))));
    };
    testutil::FdCheck fd;
    CHECK(fd.max_rel_error(params, loss, grads) < 1e-4);
}

TEST_CASE("two-layer composite keeps gradients exact") {
    Rng rng(17);
    DenseLayer l1("l1", 3, 5, Activation::tanh);
    DenseLayer l2("l2", 5, 2, Activation::identity);
    l1.init(rng);
    l2.init(rng);
    Tensor input = Tensor::column({0.2, -0.4, 0.9});

    std::vector<ParamTensor*> params = l1.params();
    for (auto* p : l2.params()) params.push_back(p);
    auto forward = [&](Tape& tape) {
        return tape.mean_all(dense_apply(
            tape, l2, dense_apply(tape, l1, tape.constant(input))));
    };
    auto loss = [&] {
        Tape tape;
        return tape.value(forward(tape)).data[0];
    };
    auto grads = [&] {
        Tape tape;
        tape.backward(forward(tape));
    };
    testutil::FdCheck fd;
    CHECK(fd.max_rel_error(params, loss, grads) < 1e-4);
}

TEST_CASE("forward pass is deterministic") {
    Rng rng(23);
    DenseLayer layer("d", 4, 4, Activation::tanh);
    layer.init(rng);
    Tensor input = Tensor::column({0.1, 0.2, 0.3, 0.4});
    Tape t1, t2;
    auto o1 = dense_apply(t1, layer, t1.constant(input));
    auto o2 = dense_apply(t2, layer, t2.constant(input));
    for (int i = 0; i < 4; ++i)
        CHECK(t1.value(o1).data[i] == t2.value(o2).data[i]);
}

TEST_CASE("adam: zero gradient leaves parameters untouched") {
    ParamTensor p("p", 2, 2);
    p.value.data = {1.0, 2.0, 3.0, 4.0};
    AdamOptimizer opt(0.1);
    opt.step({&p});
    CHECK(p.value.data == std::vector<double>{1.0, 2.0, 3.0, 4.0});
}

TEST_CASE("adam: first bias-corrected step is about lr") {
    ParamTensor p("p", 1, 1);
    p.value.data[0] = 1.0;
    p.grad.data[0] = 1.0;
    AdamOptimizer opt(0.1);
    opt.step({&p});
    CHECK(p.value.data[0] == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("adam: 100 steps shrink x on f(x) = x^2") {
    // oracle: the same scalar recursion run independently
    ParamTensor p("x", 1, 1);
    p.value.data[0] = 1.0;
    AdamOptimizer opt(1e-2);
    double m = 0.0, v = 0.0, x_ref = 1.0;
    for (int t = 1; t <= 100; ++t) {
        p.grad.data[0] = 2.0 * p.value.data[0];
        const double g = 2.0 * x_ref;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        x_ref -= 1e-2 * (m / (1 - std::pow(0.9, t))) /
                 (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
        opt.step({&p});
        p.zero_grad();
    }
    CHECK(p.value.data[0] == doctest::Approx(x_ref).epsilon(1e-12));
    CHECK(std::fabs(p.value.data[0]) < 0.5);
}

TEST_CASE("adam: non-finite gradient names the parameter") {
    ParamTensor p("layer.w", 1, 1);
    p.grad.data[0] = std::nan("");
    AdamOptimizer opt(0.1);
    try {
        opt.step({&p});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("layer.w") != std::string::npos);
    }
}

TEST_CASE("checkpoint round-trips exactly") {
    Rng rng(31);
    DenseLayer layer("net.dense", 3, 2, Activation::tanh);
    layer.init(rng);
    for (double& v : layer.b.value.data) v = rng.normal();

    std::stringstream ss;
    save_checkpoint(ss, layer.params());

    DenseLayer restored("net.dense", 3, 2, Activation::tanh);
    load_checkpoint(ss, restored.params());
    CHECK(restored.w.value.data == layer.w.value.data);
    CHECK(restored.b.value.data == layer.b.value.data);
}

TEST_CASE("checkpoint rejects mismatched names") {
    DenseLayer a("a", 2, 2), b("b", 2, 2);
    std::stringstream ss;
    save_checkpoint(ss, a.params());
    CHECK_THROWS_AS(load_checkpoint(ss, b.params()), Error);
}

TEST_CASE("mse of equal tensors is zero and non-negative otherwise") {
    Tape tape;
    Tensor t = Tensor::column({1.0, 2.0});
    CHECK(tape.value(tape.mse(tape.constant(t), t)).data[0] == 0.0);
    Tensor o = Tensor::column({1.5, 1.0});
    CHECK(tape.value(tape.mse(tape.constant(o), t)).data[0] ==
          doctest::Approx((0.25 + 1.0) / 2.0));
}
