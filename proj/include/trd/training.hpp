#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "trd/diffusion.hpp"
#include "trd/model.hpp"

namespace trd {

/// One degraded/clean pair. `box` is populated for deblocking samples and
/// shares the (padded) grid of `input`.
struct TrainSample {
    Image input; // f_n for denoising, decoded JPEG for deblocking
    Image truth; // u_gt
    QBox box;    // deblocking only

    void validate(Task task) const;
};

/// Quadratic loss 0.5 * ||u - u_gt||^2; training cost is the sum over samples.
double loss(const Image& u, const Image& u_gt);

/// img + sigma * N(0,1), Box-Muller over mt19937_64 so the byte stream is
/// pinned by (seed, size) alone.
Image add_noise(const Image& img, double sigma, uint64_t seed);

// ---------------------------------------------------------------------------
// Parameter packing

/// Which parts of a stage enter the flat optimization vector. Filter
/// coefficients are always included; weights are dropped when training with
/// frozen influence functions, lambda is dropped for deblocking stages.
struct ParamLayout {
    int n_k = 0;
    int n_basis = 0;
    int n_rbf = 0;
    bool with_weights = true;
    bool with_lambda = true;

    size_t per_stage() const {
        return size_t(n_k) * n_basis + (with_weights ? size_t(n_k) * n_rbf : 0) +
               (with_lambda ? 1 : 0);
    }
};

ParamLayout layout_for(const TrdModel& model, bool train_weights = true);

void pack_stage(const StageParams& sp, const ParamLayout& lay, double* out);
void unpack_stage(const double* x, const ParamLayout& lay, StageParams& sp);
std::vector<double> pack_model(const TrdModel& model, const ParamLayout& lay);
void unpack_model(const std::vector<double>& x, const ParamLayout& lay, TrdModel& model);

// ---------------------------------------------------------------------------
// Stage forward/backward with retained intermediates

/// Forward pass of one stage keeping everything the backward sweep needs.
struct StageEval {
    Image out;
    std::vector<Kernel> kernels;
    std::vector<Kernel> rotated;
    std::vector<Image> v;          // filter responses k_i * u
    std::vector<Image> phi;        // phi_i(v_i)
    std::vector<uint8_t> in_box;   // deblock: 1 where the coefficient stayed strictly inside Q
};

StageEval stage_forward(const Image& u_prev, const TrainSample& sample, const StageParams& sp,
                        const FilterBasis& basis, Task task, BoundaryMode mode);

/// Accumulates (d u_t / d Theta_t)^T * upstream into `grad` (layout order) and
/// optionally returns (d u_t / d u_{t-1})^T * upstream through `grad_input`.
void stage_backward(const StageEval& eval, const Image& u_prev, const TrainSample& sample,
                    const StageParams& sp, const FilterBasis& basis, Task task,
                    BoundaryMode mode, const Image& upstream, const ParamLayout& lay,
                    double* grad, Image* grad_input);

/// Spec-shaped conveniences over forward+backward (tests use these).
std::vector<double> stage_param_grad(const TrainSample& sample, const Image& u_prev,
                                     const StageParams& sp, const FilterBasis& basis, Task task,
                                     const Image& upstream, const ParamLayout& lay,
                                     BoundaryMode mode = BoundaryMode::symmetric);
Image stage_input_grad(const TrainSample& sample, const Image& u_prev, const StageParams& sp,
                       const FilterBasis& basis, Task task, const Image& upstream,
                       BoundaryMode mode = BoundaryMode::symmetric);

// ---------------------------------------------------------------------------
// L-BFGS

struct LbfgsConfig {
    int memory = 10;
    int max_iters = 200;
    double c1 = 1e-4; // sufficient decrease
    double c2 = 0.9;  // curvature
    double grad_tol = 1e-6; // relative gradient-norm stop
    int max_bisections = 30;
};

enum class LbfgsStatus { gradient_converged, max_iterations, line_search_failed };

struct LbfgsResult {
    std::vector<double> x; // best iterate
    double f = 0.0;
    std::vector<double> history; // f(x0), then cost after each iteration
    int iterations = 0;
    LbfgsStatus status = LbfgsStatus::max_iterations;
};

/// Two-loop recursion with strong Wolfe line search. Returns the best iterate;
/// a failed line search downgrades to a warning status instead of throwing.
LbfgsResult lbfgs_minimize(
    const std::function<double(const std::vector<double>&, std::vector<double>&)>& fg,
    std::vector<double> x0, const LbfgsConfig& cfg = {});

// ---------------------------------------------------------------------------
// Gradient certification

struct GradProblem {
    /// Returns f(x); fills *grad when non-null.
    std::function<double(const std::vector<double>&, std::vector<double>*)> eval;
    /// Optional nonsmoothness signature (e.g. proj_Q clamp pattern). A
    /// coordinate whose +/-h signatures differ is excluded from the check.
    std::function<uint64_t(const std::vector<double>&)> signature;
    std::vector<double> x0;
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    size_t worst_coord = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::vector<size_t> excluded;
};

/// Central differences per coordinate vs the analytic gradient;
/// rel err = |a - n| / max(1e-8, |a| + |n|).
GradCheckReport grad_check(const GradProblem& problem, const std::vector<double>& x, double h);

/// Training objectives wrapped as checkable problems. These are the same
/// callables the drivers hand to L-BFGS.
struct TrainConfig {
    LbfgsConfig lbfgs;
    bool train_influence = true; // false: B.I control, weights frozen at init
    int threads = 0;             // <=0: TRD_THREADS or hardware concurrency
    BoundaryMode mode = BoundaryMode::symmetric;
};

GradProblem make_stage_problem(const TrdModel& model, int stage_index,
                               const std::vector<TrainSample>& data, const TrainConfig& cfg);
GradProblem make_joint_problem(const TrdModel& model, const std::vector<TrainSample>& data,
                               const TrainConfig& cfg);

/// Randomized small instance for the certification suite: an 8x8 sample and a
/// tiny model (2 filters of 3x3, 15 RBFs) with random parameters.
struct CheckInstance {
    TrdModel model;
    std::vector<TrainSample> samples;
};
CheckInstance make_check_instance(Task task, int stages, uint64_t seed);

// ---------------------------------------------------------------------------
// Drivers

struct StageRun {
    std::vector<double> cost_history;
    LbfgsStatus status = LbfgsStatus::max_iterations;
};

struct TrainReport {
    std::vector<StageRun> greedy;
    StageRun joint;
    double greedy_final_cost = 0.0;
    double joint_final_cost = 0.0;
    int threads_used = 1;
};

/// Stage-by-stage training from a (plain-initialized) model. Stage t's
/// variables warm-start from stage t-1's trained values.
TrdModel greedy_train(const std::vector<TrainSample>& data, const TrdModel& init,
                      const TrainConfig& cfg, TrainReport* report = nullptr);

/// Backpropagation training of all stages against the final-stage loss,
/// starting from a greedy-trained model.
TrdModel joint_train(const std::vector<TrainSample>& data, const TrdModel& greedy_model,
                     const TrainConfig& cfg, TrainReport* report = nullptr);

/// Thread-count resolution honoring the TRD_THREADS environment variable.
int resolve_threads(int requested);

} // namespace trd
