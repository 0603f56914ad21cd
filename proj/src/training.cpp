#include "trd/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <random>
#include <thread>

namespace trd {

void TrainSample::validate(Task task) const {
    if (!input.same_shape(truth)) throw DataError("sample: input/truth dimension mismatch");
    if (task == Task::deblock) {
        if (input.height % 8 != 0 || input.width % 8 != 0)
            throw DataError("sample: deblocking samples must have multiple-of-8 dimensions");
        if (!box.lower.same_shape(input) || !box.upper.same_shape(input))
            throw DataError("sample: quantization box does not match the sample grid");
    }
}

double loss(const Image& u, const Image& u_gt) {
    if (!u.same_shape(u_gt)) throw DataError("loss: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        double d = u.data[i] - u_gt.data[i];
        acc += d * d;
    }
    return 0.5 * acc;
}

Image add_noise(const Image& img, double sigma, uint64_t seed) {
    if (sigma < 0.0) throw DataError("add_noise: sigma must be >= 0");
    Image out = img;
    if (sigma == 0.0) return out;
    std::mt19937_64 rng(seed);
    // Box-Muller on raw 53-bit uniforms: reproducible independently of any
    // library's normal_distribution internals.
    auto uniform = [&rng]() { return (double(rng() >> 11) + 1.0) * 0x1p-53; };
    size_t i = 0;
    while (i < out.size()) {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        out.data[i++] += sigma * r * std::cos(2.0 * M_PI * u2);
        if (i < out.size()) out.data[i++] += sigma * r * std::sin(2.0 * M_PI * u2);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Packing

ParamLayout layout_for(const TrdModel& model, bool train_weights) {
    ParamLayout lay;
    lay.n_k = model.filters_per_stage;
    lay.n_basis = model.filter_size * model.filter_size - 1;
    lay.n_rbf = model.rbf.count;
    lay.with_weights = train_weights;
    lay.with_lambda = model.task == Task::denoise;
    return lay;
}

void pack_stage(const StageParams& sp, const ParamLayout& lay, double* out) {
    for (int i = 0; i < lay.n_k; ++i)
        for (int b = 0; b < lay.n_basis; ++b) *out++ = sp.coeffs[i][b];
    if (lay.with_weights)
        for (int i = 0; i < lay.n_k; ++i)
            for (int j = 0; j < lay.n_rbf; ++j) *out++ = sp.mixtures[i].weights[j];
    if (lay.with_lambda) *out++ = sp.log_lambda;
}

void unpack_stage(const double* x, const ParamLayout& lay, StageParams& sp) {
    for (int i = 0; i < lay.n_k; ++i)
        for (int b = 0; b < lay.n_basis; ++b) sp.coeffs[i][b] = *x++;
    if (lay.with_weights)
        for (int i = 0; i < lay.n_k; ++i)
            for (int j = 0; j < lay.n_rbf; ++j) sp.mixtures[i].weights[j] = *x++;
    if (lay.with_lambda) sp.log_lambda = *x++;
}

std::vector<double> pack_model(const TrdModel& model, const ParamLayout& lay) {
    std::vector<double> x(lay.per_stage() * model.stage_count);
    for (int t = 0; t < model.stage_count; ++t)
        pack_stage(model.stages[t], lay, x.data() + size_t(t) * lay.per_stage());
    return x;
}

void unpack_model(const std::vector<double>& x, const ParamLayout& lay, TrdModel& model) {
    if (x.size() != lay.per_stage() * model.stage_count)
        throw DataError("unpack_model: parameter vector length mismatch");
    for (int t = 0; t < model.stage_count; ++t)
        unpack_stage(x.data() + size_t(t) * lay.per_stage(), lay, model.stages[t]);
}

// ---------------------------------------------------------------------------
// Stage forward / backward

StageEval stage_forward(const Image& u_prev, const TrainSample& sample, const StageParams& sp,
                        const FilterBasis& basis, Task task, BoundaryMode mode) {
    StageEval ev;
    const size_t n_k = sp.coeffs.size();
    ev.kernels.reserve(n_k);
    ev.rotated.reserve(n_k);
    ev.v.reserve(n_k);
    ev.phi.reserve(n_k);

    Image sum(u_prev.height, u_prev.width, 0.0);
    for (size_t i = 0; i < n_k; ++i) {
        ev.kernels.push_back(assemble_filter(basis, sp.coeffs[i]));
        ev.rotated.push_back(rot180(ev.kernels.back()));
        ev.v.push_back(correlate_same(u_prev, ev.kernels.back(), mode));
        ev.phi.push_back(phi_map(sp.mixtures[i], ev.v.back()));
        Image back = correlate_same(ev.phi.back(), ev.rotated.back(), mode);
        for (size_t p = 0; p < sum.size(); ++p) sum.data[p] += back.data[p];
    }

    if (task == Task::denoise) {
        const double lambda = sp.lambda();
        ev.out = Image(u_prev.height, u_prev.width);
        for (size_t p = 0; p < sum.size(); ++p)
            ev.out.data[p] =
                u_prev.data[p] - (sum.data[p] + lambda * (u_prev.data[p] - sample.input.data[p]));
    } else {
        Image r(u_prev.height, u_prev.width);
        for (size_t p = 0; p < sum.size(); ++p) r.data[p] = u_prev.data[p] - sum.data[p];
        Image c = block_dct(r);
        ev.in_box.assign(c.size(), 0);
        for (size_t p = 0; p < c.size(); ++p) {
            double lo = sample.box.lower.data[p], hi = sample.box.upper.data[p];
            if (c.data[p] > lo && c.data[p] < hi)
                ev.in_box[p] = 1;
            else
                c.data[p] = std::clamp(c.data[p], lo, hi);
        }
        ev.out = block_idct(c);
    }
    return ev;
}

namespace {

// Per-pixel basis sweep of the backward pass for one filter: q = phi'(v).*b
// and, when requested, gw[j] -= sum_p basis_j(v_p) * b_p.
void backward_influence(const RbfMixture& mix, const Image& v, const Image& b, Image& q,
                        double* gw) {
    const RbfConfig& cfg = mix.config;
    const int m = cfg.count;
    const double g = cfg.gamma;
    const double step = cfg.spacing();
    const double mu0 = -cfg.radius;
    q = Image(v.height, v.width);
    if (cfg.kind == RbfKind::gaussian) {
        const double inv2g2 = 1.0 / (2.0 * g * g);
        const double invg2 = 1.0 / (g * g);
        for (size_t p = 0; p < v.size(); ++p) {
            const double z = v.data[p];
            const double bp = b.data[p];
            double dphi = 0.0;
            double mu = mu0;
            for (int j = 0; j < m; ++j, mu += step) {
                double d = z - mu;
                double atom = std::exp(-d * d * inv2g2);
                dphi += mix.weights[j] * (-d * invg2) * atom;
                if (gw) gw[j] -= atom * bp;
            }
            q.data[p] = dphi * bp;
        }
    } else {
        for (size_t p = 0; p < v.size(); ++p) {
            const double z = v.data[p];
            const double bp = b.data[p];
            double dphi = 0.0;
            double mu = mu0;
            for (int j = 0; j < m; ++j, mu += step) {
                double d = z - mu;
                double ad = std::abs(d);
                double atom = ad < g ? 1.0 - ad / g : 0.0;
                if (d > -g && d <= 0.0)
                    dphi += mix.weights[j] / g;
                else if (d > 0.0 && d <= g)
                    dphi -= mix.weights[j] / g;
                if (gw) gw[j] -= atom * bp;
            }
            q.data[p] = dphi * bp;
        }
    }
}

// d <wgt, correlate_same(src, k, mode)> / d k(t): one value per tap position,
// in the geometry (anchor) of `geom`.
std::vector<double> kernel_gradient(const Image& src, const Image& wgt, const Kernel& geom,
                                    BoundaryMode mode) {
    std::vector<double> taps(size_t(geom.rows) * geom.cols, 0.0);
    const int h = src.height, w = src.width;
    for (int i = 0; i < geom.rows; ++i) {
        for (int j = 0; j < geom.cols; ++j) {
            const int dr = i - geom.anchor_r, dc = j - geom.anchor_c;
            double acc = 0.0;
            // interior block without boundary mapping
            const int r0 = std::max(0, -dr), r1 = std::min(h, h - dr);
            const int c0 = std::max(0, -dc), c1 = std::min(w, w - dc);
            for (int r = r0; r < r1; ++r) {
                const double* ws = &wgt.data[size_t(r) * w];
                const double* ss = &src.data[size_t(r + dr) * w + dc];
                for (int c = c0; c < c1; ++c) acc += ws[c] * ss[c];
            }
            if (mode != BoundaryMode::zero) {
                auto edge = [&](int r, int c) {
                    int sr = r + dr, sc = c + dc;
                    if (sr >= 0 && sr < h && sc >= 0 && sc < w) return; // interior, done above
                    // replicate the map_index logic via pad-free sampling
                    auto map1 = [&](int idx, int n) {
                        if (idx >= 0 && idx < n) return idx;
                        if (mode == BoundaryMode::periodic) {
                            int v = idx % n;
                            return v < 0 ? v + n : v;
                        }
                        while (idx < 0 || idx >= n) {
                            if (idx < 0) idx = -idx - 1;
                            if (idx >= n) idx = 2 * n - 1 - idx;
                        }
                        return idx;
                    };
                    acc += wgt.at(r, c) * src.at(map1(sr, h), map1(sc, w));
                };
                for (int r = 0; r < h; ++r)
                    for (int c = 0; c < w; ++c)
                        if (r < r0 || r >= r1 || c < c0 || c >= c1) edge(r, c);
            }
            taps[size_t(i) * geom.cols + j] = acc;
        }
    }
    return taps;
}

// Pulls the deblocking upstream back through D^T proj_Q D (its own transpose).
Image deblock_pullback(const Image& upstream, const std::vector<uint8_t>& in_box) {
    Image t = block_dct_raw(upstream);
    for (size_t p = 0; p < t.size(); ++p)
        if (!in_box[p]) t.data[p] = 0.0;
    return block_idct_raw(t);
}

} // namespace

void stage_backward(const StageEval& ev, const Image& u_prev, const TrainSample& sample,
                    const StageParams& sp, const FilterBasis& basis, Task task,
                    BoundaryMode mode, const Image& upstream, const ParamLayout& lay,
                    double* grad, Image* grad_input) {
    const int n_k = lay.n_k;
    const int n_basis = lay.n_basis;

    // For deblocking every path sees the upstream pulled back through the
    // projection; for denoising it is the raw upstream.
    Image ur = task == Task::deblock ? deblock_pullback(upstream, ev.in_box) : upstream;

    Image gin;
    if (grad_input) {
        gin = ur;
        if (task == Task::denoise) {
            const double lambda = sp.lambda();
            for (double& v : gin.data) v *= (1.0 - lambda);
        }
    }

    double* gc = grad;                                      // [n_k][n_basis]
    double* gw = lay.with_weights ? grad + size_t(n_k) * n_basis : nullptr;

    for (int i = 0; i < n_k; ++i) {
        const Kernel& k = ev.kernels[i];
        const Kernel& kbar = ev.rotated[i];
        Image b = correlate_adjoint(ur, kbar, mode);

        Image q;
        backward_influence(sp.mixtures[i], ev.v[i], b, q,
                           gw ? gw + size_t(i) * lay.n_rbf : nullptr);

        std::vector<double> tg1 = kernel_gradient(u_prev, q, k, mode);
        std::vector<double> tg2 = kernel_gradient(ev.phi[i], ur, kbar, mode);
        // tg2 lives in kbar tap coordinates; fold it back onto k's taps
        const int last = k.rows * k.cols - 1;
        for (int t = 0; t <= last; ++t) tg1[t] += tg2[last - t];
        for (int bidx = 0; bidx < n_basis; ++bidx) {
            const Kernel& atom = basis.atoms[bidx];
            double acc = 0.0;
            for (int t = 0; t <= last; ++t) acc += atom.taps[t] * tg1[t];
            gc[size_t(i) * n_basis + bidx] -= acc;
        }

        if (grad_input) {
            Image back = correlate_adjoint(q, k, mode);
            for (size_t p = 0; p < gin.size(); ++p) gin.data[p] -= back.data[p];
        }
    }

    if (lay.with_lambda) {
        const double lambda = sp.lambda();
        double acc = 0.0;
        for (size_t p = 0; p < upstream.size(); ++p)
            acc += (u_prev.data[p] - sample.input.data[p]) * upstream.data[p];
        grad[lay.per_stage() - 1] -= lambda * acc;
    }

    if (grad_input) *grad_input = std::move(gin);
}

std::vector<double> stage_param_grad(const TrainSample& sample, const Image& u_prev,
                                     const StageParams& sp, const FilterBasis& basis, Task task,
                                     const Image& upstream, const ParamLayout& lay,
                                     BoundaryMode mode) {
    StageEval ev = stage_forward(u_prev, sample, sp, basis, task, mode);
    std::vector<double> grad(lay.per_stage(), 0.0);
    stage_backward(ev, u_prev, sample, sp, basis, task, mode, upstream, lay, grad.data(), nullptr);
    return grad;
}

Image stage_input_grad(const TrainSample& sample, const Image& u_prev, const StageParams& sp,
                       const FilterBasis& basis, Task task, const Image& upstream,
                       BoundaryMode mode) {
    StageEval ev = stage_forward(u_prev, sample, sp, basis, task, mode);
    ParamLayout lay;
    lay.n_k = int(sp.coeffs.size());
    lay.n_basis = basis.count();
    lay.n_rbf = sp.mixtures.empty() ? 0 : sp.mixtures[0].config.count;
    lay.with_lambda = task == Task::denoise;
    std::vector<double> grad(lay.per_stage(), 0.0);
    Image gin;
    stage_backward(ev, u_prev, sample, sp, basis, task, mode, upstream, lay, grad.data(), &gin);
    return gin;
}

// ---------------------------------------------------------------------------
// Parallel evaluation

int resolve_threads(int requested) {
    int n = requested > 0 ? requested : int(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("TRD_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return n;
}

namespace {

void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn) {
    threads = int(std::min(size_t(std::max(threads, 1)), count));
    if (threads <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Shared cost+gradient over samples for a contiguous stage range
// [first_stage, first_stage + n_stages). u_prev holds each sample's input to
// first_stage. Per-sample contributions are reduced in sample order so the
// result is independent of the thread count.
struct RangeObjective {
    TrdModel model; // working copy; stages in range are overwritten per call
    int first_stage = 0;
    int n_stages = 1;
    const std::vector<TrainSample>* data = nullptr;
    std::vector<Image> u_prev;
    ParamLayout lay;
    FilterBasis basis;
    TrainConfig cfg;

    void load(const std::vector<double>& x) {
        for (int t = 0; t < n_stages; ++t)
            unpack_stage(x.data() + size_t(t) * lay.per_stage(), lay,
                         model.stages[first_stage + t]);
    }

    double eval(const std::vector<double>& x, std::vector<double>* grad,
                std::vector<uint64_t>* signatures = nullptr) {
        load(x);
        const size_t S = data->size();
        std::vector<double> losses(S, 0.0);
        std::vector<std::vector<double>> grads;
        if (grad) grads.assign(S, {});
        if (signatures) signatures->assign(S, 0);

        parallel_for(S, resolve_threads(cfg.threads), [&](size_t s) {
            const TrainSample& sample = (*data)[s];
            Image u = u_prev[s];
            std::vector<StageEval> evals(n_stages);
            std::vector<Image> inputs;
            inputs.reserve(n_stages);
            for (int t = 0; t < n_stages; ++t) {
                inputs.push_back(u);
                evals[t] = stage_forward(u, sample, model.stages[first_stage + t], basis,
                                         model.task, cfg.mode);
                u = evals[t].out;
            }
            losses[s] = loss(u, sample.truth);
            if (signatures) {
                uint64_t hash = 1469598103934665603ull; // FNV-1a over clamp masks
                for (const auto& ev : evals)
                    for (uint8_t bit : ev.in_box) hash = (hash ^ bit) * 1099511628211ull;
                (*signatures)[s] = hash;
            }
            if (!grad) return;
            std::vector<double> gs(lay.per_stage() * n_stages, 0.0);
            Image upstream(u.height, u.width);
            for (size_t p = 0; p < u.size(); ++p)
                upstream.data[p] = u.data[p] - sample.truth.data[p];
            for (int t = n_stages - 1; t >= 0; --t) {
                Image gin;
                stage_backward(evals[t], inputs[t], sample, model.stages[first_stage + t], basis,
                               model.task, cfg.mode, upstream, lay,
                               gs.data() + size_t(t) * lay.per_stage(), t > 0 ? &gin : nullptr);
                if (t > 0) upstream = std::move(gin);
            }
            grads[s] = std::move(gs);
        });

        double total = 0.0;
        for (double l : losses) total += l;
        if (grad) {
            grad->assign(lay.per_stage() * n_stages, 0.0);
            for (const auto& gs : grads)
                for (size_t i = 0; i < gs.size(); ++i) (*grad)[i] += gs[i];
        }
        return total;
    }

    uint64_t signature(const std::vector<double>& x) {
        std::vector<uint64_t> sig;
        eval(x, nullptr, &sig);
        uint64_t hash = 1469598103934665603ull;
        for (uint64_t v : sig)
            for (int b = 0; b < 8; ++b) hash = (hash ^ ((v >> (8 * b)) & 0xff)) * 1099511628211ull;
        return hash;
    }
};

std::shared_ptr<RangeObjective> make_range_objective(const TrdModel& model, int first_stage,
                                                     int n_stages,
                                                     const std::vector<TrainSample>& data,
                                                     const TrainConfig& cfg) {
    if (data.empty()) throw DataError("training requires at least one sample");
    model.validate();
    for (const auto& s : data) s.validate(model.task);

    auto obj = std::make_shared<RangeObjective>();
    obj->model = model;
    obj->first_stage = first_stage;
    obj->n_stages = n_stages;
    obj->data = &data;
    obj->lay = layout_for(model, cfg.train_influence);
    obj->basis = build_basis(model.filter_size);
    obj->cfg = cfg;

    // roll frozen earlier stages once
    obj->u_prev.reserve(data.size());
    for (const auto& sample : data) {
        Image u = sample.input;
        for (int t = 0; t < first_stage; ++t)
            u = stage_forward(u, sample, model.stages[t], obj->basis, model.task, cfg.mode).out;
        obj->u_prev.push_back(std::move(u));
    }
    return obj;
}

} // namespace

GradProblem make_stage_problem(const TrdModel& model, int stage_index,
                               const std::vector<TrainSample>& data, const TrainConfig& cfg) {
    auto obj = make_range_objective(model, stage_index, 1, data, cfg);
    GradProblem p;
    p.eval = [obj](const std::vector<double>& x, std::vector<double>* g) {
        return obj->eval(x, g);
    };
    if (model.task == Task::deblock)
        p.signature = [obj](const std::vector<double>& x) { return obj->signature(x); };
    p.x0.assign(obj->lay.per_stage(), 0.0);
    pack_stage(model.stages[stage_index], obj->lay, p.x0.data());
    return p;
}

GradProblem make_joint_problem(const TrdModel& model, const std::vector<TrainSample>& data,
                               const TrainConfig& cfg) {
    auto obj = make_range_objective(model, 0, model.stage_count, data, cfg);
    GradProblem p;
    p.eval = [obj](const std::vector<double>& x, std::vector<double>* g) {
        return obj->eval(x, g);
    };
    if (model.task == Task::deblock)
        p.signature = [obj](const std::vector<double>& x) { return obj->signature(x); };
    p.x0 = pack_model(model, obj->lay);
    return p;
}

CheckInstance make_check_instance(Task task, int stages, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 255.0);

    CheckInstance inst;
    ModelConfig mc;
    mc.task = task;
    mc.stages = stages;
    mc.filter_size = 3;
    mc.filters = 2;
    mc.rbf = RbfConfig::make(RbfKind::gaussian, 15, 310.0);
    if (task == Task::deblock) mc.quality = 10;
    inst.model = init_model(mc);
    for (auto& sp : inst.model.stages) {
        for (auto& c : sp.coeffs)
            for (double& v : c) v = 0.4 * normal(rng);
        for (auto& mix : sp.mixtures)
            for (double& w : mix.weights) w = 0.5 * normal(rng);
        sp.log_lambda = std::log(0.05 + 0.2 * std::abs(normal(rng)));
    }

    Image clean(8, 8);
    for (double& v : clean.data) v = uni(rng);
    TrainSample s;
    if (task == Task::denoise) {
        s.truth = clean;
        s.input = add_noise(clean, 25.0, rng());
    } else {
        DegradeResult dr = jpeg_degrade(clean, inst.model.quality);
        s.truth = clean;
        s.input = dr.decoded;
        s.box = dr.box;
    }
    inst.samples.push_back(std::move(s));
    return inst;
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckReport grad_check(const GradProblem& problem, const std::vector<double>& x, double h) {
    if (!(h > 0.0)) throw DataError("grad_check: h must be > 0");
    GradCheckReport rep;
    std::vector<double> analytic;
    problem.eval(x, &analytic);
    std::vector<double> xt = x;
    for (size_t i = 0; i < x.size(); ++i) {
        xt[i] = x[i] + h;
        double fp = problem.eval(xt, nullptr);
        uint64_t sp = problem.signature ? problem.signature(xt) : 0;
        xt[i] = x[i] - h;
        double fm = problem.eval(xt, nullptr);
        uint64_t sm = problem.signature ? problem.signature(xt) : 0;
        xt[i] = x[i];
        if (sp != sm) {
            rep.excluded.push_back(i);
            continue;
        }
        double numeric = (fp - fm) / (2.0 * h);
        double rel = std::abs(analytic[i] - numeric) /
                     std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
        if (rel > rep.max_rel_err) {
            rep.max_rel_err = rel;
            rep.worst_coord = i;
            rep.worst_analytic = analytic[i];
            rep.worst_numeric = numeric;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Drivers

TrdModel greedy_train(const std::vector<TrainSample>& data, const TrdModel& init,
                      const TrainConfig& cfg, TrainReport* report) {
    TrdModel model = init;
    model.validate();
    if (data.empty()) throw DataError("greedy_train: need at least one sample");
    if (report) {
        report->greedy.clear();
        report->threads_used = resolve_threads(cfg.threads);
    }
    for (int t = 0; t < model.stage_count; ++t) {
        if (t > 0) model.stages[t] = model.stages[t - 1]; // warm start
        GradProblem problem = make_stage_problem(model, t, data, cfg);
        LbfgsResult res = lbfgs_minimize(
            [&problem](const std::vector<double>& x, std::vector<double>& g) {
                return problem.eval(x, &g);
            },
            problem.x0, cfg.lbfgs);
        ParamLayout lay = layout_for(model, cfg.train_influence);
        unpack_stage(res.x.data(), lay, model.stages[t]);
        if (report) {
            report->greedy.push_back({res.history, res.status});
            report->greedy_final_cost = res.f;
        }
    }
    model.trained_mode = TrainedMode::greedy;
    return model;
}

TrdModel joint_train(const std::vector<TrainSample>& data, const TrdModel& greedy_model,
                     const TrainConfig& cfg, TrainReport* report) {
    TrdModel model = greedy_model;
    model.validate();
    if (data.empty()) throw DataError("joint_train: need at least one sample");
    GradProblem problem = make_joint_problem(model, data, cfg);
    LbfgsResult res = lbfgs_minimize(
        [&problem](const std::vector<double>& x, std::vector<double>& g) {
            return problem.eval(x, &g);
        },
        problem.x0, cfg.lbfgs);
    ParamLayout lay = layout_for(model, cfg.train_influence);
    unpack_model(res.x, lay, model);
    if (report) {
        report->joint = {res.history, res.status};
        report->joint_final_cost = res.f;
        report->threads_used = resolve_threads(cfg.threads);
    }
    model.trained_mode = TrainedMode::joint;
    return model;
}

} // namespace trd
