#pragma once

#include <string>
#include <vector>

#include "risctl/diffusion/observation.hpp"
#include "risctl/diffusion/schedule.hpp"
#include "risctl/nn/layers.hpp"

namespace risctl::diffusion {

struct DenoiserConfig {
    int action_dim = 0;   // 2 N R, set from the scene
    int width = 256;      // token embedding width
    int ff_hidden = 256;  // attention feedforward width
    int time_dim = 16;    // sinusoidal step embedding size
};

// Conditional denoising network. Observation tokens and a state token
// (flattened latent + step embedding) are encoded to a common width, mixed
// by two self-attention blocks, and the state token's row is mapped to the
// predicted noise in R^{2NR}.
class Denoiser {
public:
    Denoiser() = default;
    Denoiser(const DenoiserConfig& cfg, Rng& rng);

    // x_k is a (2NR x 1) tape variable; k is the 1-based step index.
    nn::Tape::Var forward(nn::Tape& tape, const Observation& obs,
                          nn::Tape::Var x_k, int k);

    const DenoiserConfig& config() const { return cfg_; }
    std::vector<nn::ParamTensor*> params();

    void save(const std::string& path);
    void load(const std::string& path);

    // test hook: force the output head to a constant
    void zero_head();

private:
    DenoiserConfig cfg_;
    nn::DenseLayer token_enc_;
    nn::DenseLayer state_enc_;
    nn::AttentionBlock block1_;
    nn::AttentionBlock block2_;
    nn::DenseLayer head_;
};

}  // namespace risctl::diffusion
