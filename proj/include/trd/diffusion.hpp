#pragma once

#include <variant>
#include <vector>

#include "trd/jpegsim.hpp"
#include "trd/model.hpp"

namespace trd {

/// Per-stage record of a rollout: u_0..u_T and, when requested, the filter
/// responses v_i = k_i * u_{t-1} of every stage.
struct StageTrace {
    std::vector<Image> states;
    std::vector<std::vector<Image>> responses;
};

/// One explicit Perona-Malik step with phi(z) = z/(1+z^2) and the [-1,1]
/// difference kernels. Baseline only; nothing here is trained.
Image pm_step(const Image& u, double dt, BoundaryMode mode = BoundaryMode::symmetric);

/// Diffusion update of one trained denoising stage:
///   u - (sum_i kbar_i * phi_i(k_i * u) + lambda * (u - f_n))
Image denoise_stage(const Image& u_prev, const Image& f_n, const StageParams& sp,
                    const FilterBasis& basis, BoundaryMode mode = BoundaryMode::symmetric);

/// Proximal deblocking stage: the diffusion part followed by projection onto
/// the quantization box in the block-DCT domain. Dimensions must be multiples
/// of 8 and match the box.
Image deblock_stage(const Image& u_prev, const QBox& box, const StageParams& sp,
                    const FilterBasis& basis, BoundaryMode mode = BoundaryMode::symmetric);

/// Auxiliary input for infer: empty for denoising (u_0 = f_n = input),
/// the quantization box for deblocking.
using InferAux = std::variant<std::monostate, QBox>;

/// Roll the model's stages from u_0 = input. `stages` < 0 runs all of them;
/// smaller values stop early (meaningful for greedily trained models only —
/// the CLI enforces that restriction). For deblocking, inputs that are
/// smaller than the box grid are replicate-padded, diffused on the padded
/// grid, and cropped back at the end.
Image infer(const TrdModel& model, const Image& input, const InferAux& aux = {},
            StageTrace* trace = nullptr, int stages = -1);

} // namespace trd
