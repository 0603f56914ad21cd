#include "trd/diffusion.hpp"

#include <cmath>

namespace trd {

namespace {

// Diffusion term sum_i kbar_i * phi_i(k_i * u), optionally exporting the
// filter responses v_i.
Image diffusion_term(const Image& u, const StageParams& sp, const FilterBasis& basis,
                     BoundaryMode mode, std::vector<Image>* responses) {
    Image sum(u.height, u.width, 0.0);
    for (size_t i = 0; i < sp.coeffs.size(); ++i) {
        Kernel k = assemble_filter(basis, sp.coeffs[i]);
        Image v = correlate_same(u, k, mode);
        Image phi = phi_map(sp.mixtures[i], v);
        Image back = correlate_same(phi, rot180(k), mode);
        for (size_t p = 0; p < sum.size(); ++p) sum.data[p] += back.data[p];
        if (responses) responses->push_back(std::move(v));
    }
    return sum;
}

Image denoise_stage_impl(const Image& u_prev, const Image& f_n, const StageParams& sp,
                         const FilterBasis& basis, BoundaryMode mode,
                         std::vector<Image>* responses) {
    if (!u_prev.same_shape(f_n)) throw DataError("denoise_stage: dimension mismatch");
    Image update = diffusion_term(u_prev, sp, basis, mode, responses);
    const double lambda = sp.lambda();
    Image out(u_prev.height, u_prev.width);
    for (size_t p = 0; p < out.size(); ++p)
        out.data[p] = u_prev.data[p] - (update.data[p] + lambda * (u_prev.data[p] - f_n.data[p]));
    return out;
}

Image deblock_stage_impl(const Image& u_prev, const QBox& box, const StageParams& sp,
                         const FilterBasis& basis, BoundaryMode mode,
                         std::vector<Image>* responses) {
    if (u_prev.height % 8 != 0 || u_prev.width % 8 != 0)
        throw DataError("deblock_stage: dimensions must be multiples of 8");
    if (!box.lower.same_shape(u_prev)) throw DataError("deblock_stage: box shape mismatch");
    Image update = diffusion_term(u_prev, sp, basis, mode, responses);
    Image r(u_prev.height, u_prev.width);
    for (size_t p = 0; p < r.size(); ++p) r.data[p] = u_prev.data[p] - update.data[p];
    return block_idct(proj_q(block_dct(r), box));
}

} // namespace

Image pm_step(const Image& u, double dt, BoundaryMode mode) {
    if (!(dt > 0.0)) throw DataError("pm_step: dt must be > 0");
    const Kernel kx(1, 2, {-1.0, 1.0});
    const Kernel ky(2, 1, {-1.0, 1.0});
    Image out = u;
    for (const Kernel& k : {kx, ky}) {
        Image v = correlate_same(u, k, mode);
        for (double& z : v.data) z = z / (1.0 + z * z);
        Image back = correlate_same(v, rot180(k), mode);
        for (size_t p = 0; p < out.size(); ++p) out.data[p] -= dt * back.data[p];
    }
    return out;
}

Image denoise_stage(const Image& u_prev, const Image& f_n, const StageParams& sp,
                    const FilterBasis& basis, BoundaryMode mode) {
    return denoise_stage_impl(u_prev, f_n, sp, basis, mode, nullptr);
}

Image deblock_stage(const Image& u_prev, const QBox& box, const StageParams& sp,
                    const FilterBasis& basis, BoundaryMode mode) {
    return deblock_stage_impl(u_prev, box, sp, basis, mode, nullptr);
}

Image infer(const TrdModel& model, const Image& input, const InferAux& aux, StageTrace* trace,
            int stages) {
    model.validate();
    if (stages < 0) stages = model.stage_count;
    if (stages > model.stage_count) throw DataError("infer: stage count exceeds model");

    const bool is_deblock = model.task == Task::deblock;
    const QBox* box = std::get_if<QBox>(&aux);
    if (is_deblock && !box) throw DataError("infer: deblocking requires a QBox aux");
    if (!is_deblock && box) throw DataError("infer: denoising takes no QBox aux");

    FilterBasis basis = build_basis(model.filter_size);
    Image u = input;
    const int orig_h = input.height, orig_w = input.width;
    if (is_deblock) {
        u = pad_to_block_multiple(u);
        if (!box->lower.same_shape(u)) throw DataError("infer: box does not match padded input");
    }
    if (trace) {
        trace->states.assign(1, u);
        trace->responses.clear();
    }
    for (int t = 0; t < stages; ++t) {
        std::vector<Image> resp;
        std::vector<Image>* resp_out = trace ? &resp : nullptr;
        u = is_deblock ? deblock_stage_impl(u, *box, model.stages[t], basis,
                                            BoundaryMode::symmetric, resp_out)
                       : denoise_stage_impl(u, input, model.stages[t], basis,
                                            BoundaryMode::symmetric, resp_out);
        if (trace) {
            trace->states.push_back(u);
            trace->responses.push_back(std::move(resp));
        }
    }
    if (is_deblock && (u.height != orig_h || u.width != orig_w)) u = crop(u, orig_h, orig_w);
    return u;
}

} // namespace trd
