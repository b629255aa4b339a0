#include "risctl/diffusion/denoiser.hpp"

#include "risctl/nn/checkpoint.hpp"

namespace risctl::diffusion {

Denoiser::Denoiser(const DenoiserConfig& cfg, Rng& rng)
    : cfg_(cfg),
      token_enc_("denoiser.token_enc", kTokenDim, cfg.width),
      state_enc_("denoiser.state_enc", cfg.action_dim + cfg.time_dim, cfg.width),
      block1_("denoiser.block1", cfg.width, cfg.ff_hidden),
      block2_("denoiser.block2", cfg.width, cfg.ff_hidden),
      head_("denoiser.head", cfg.width, cfg.action_dim,
            nn::Activation::identity) {
    require(cfg.action_dim > 0 && cfg.action_dim % 2 == 0,
            "Denoiser: action_dim must be a positive even number");
    token_enc_.init(rng);
    state_enc_.init(rng);
    block1_.init(rng);
    block2_.init(rng);
    head_.init(rng);
}

nn::Tape::Var Denoiser::forward(nn::Tape& tape, const Observation& obs,
                                nn::Tape::Var x_k, int k) {
    require(k >= 1, "denoiser_forward: step index must be >= 1");
    require(tape.value(x_k).rows == cfg_.action_dim &&
                tape.value(x_k).cols == 1,
            "denoiser_forward: latent dimension mismatch");
    require(obs.tokens.cols == kTokenDim,
            "denoiser_forward: observation token width mismatch");

    nn::Tape::Var tok =
        dense_apply_rows(tape, token_enc_, tape.constant(obs.tokens));

    nn::Tape::Var state_in = tape.concat_rows(
        x_k, tape.constant(nn::time_embedding(k, cfg_.time_dim)));
    nn::Tape::Var state_row =
        dense_apply_rows(tape, state_enc_, tape.transpose(state_in));

    nn::Tape::Var x = tape.concat_rows(tok, state_row);
    x = attention_block_apply(tape, block1_, x);
    x = attention_block_apply(tape, block2_, x);

    nn::Tape::Var state_out =
        tape.slice_rows(x, tape.value(x).rows - 1, tape.value(x).rows);
    return tape.transpose(dense_apply_rows(tape, head_, state_out));
}

std::vector<nn::ParamTensor*> Denoiser::params() {
    std::vector<nn::ParamTensor*> out;
    for (auto* p : token_enc_.params()) out.push_back(p);
    for (auto* p : state_enc_.params()) out.push_back(p);
    for (auto* p : block1_.params()) out.push_back(p);
    for (auto* p : block2_.params()) out.push_back(p);
    for (auto* p : head_.params()) out.push_back(p);
    return out;
}

void Denoiser::save(const std::string& path) {
    nn::save_checkpoint(path, params());
}

void Denoiser::load(const std::string& path) {
    nn::load_checkpoint(path, params());
}

void Denoiser::zero_head() {
    head_.w.value.fill(0.0);
    head_.b.value.fill(0.0);
}

}  // namespace risctl::diffusion
