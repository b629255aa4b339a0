#pragma once

#include "risctl/channel/model.hpp"
#include "risctl/nn/tensor.hpp"

namespace risctl::diffusion {

// Conditioning input of the generative policy. The token matrix is what the
// networks see; the raw snapshot and scene ride along so reward gradients
// and realized rates can be evaluated against the same channel state.
//
// Token layout ((R + 1) x 6), everything scaled by 1/|h_l|:
//   per-RIS row:  [0, N Re(h_i h_li), N Im(h_i h_li),
//                     N Re(h_i sum_m h_mi), N Im(h_i sum_m h_mi), 0]
//   global row:   [1, Re(h_l), Im(h_l), Re(sum_m h_m), Im(sum_m h_m), snr]
// The factor N puts a fully aligned RIS contribution on the same footing as
// the direct link; snr is 10 log10(P / sigma^2) / 100.
struct Observation {
    nn::Tensor tokens;
    channel::CsiSnapshot csi;
    channel::Scene scene;

    int num_ris() const { return tokens.rows - 1; }
};

inline constexpr int kTokenDim = 6;

Observation make_observation(const channel::CsiSnapshot& csi,
                             const channel::Scene& scene);

}  // namespace risctl::diffusion
