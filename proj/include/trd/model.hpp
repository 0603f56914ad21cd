#pragma once

#include <string>
#include <vector>

#include "trd/image.hpp"
#include "trd/influence.hpp"

namespace trd {

enum class Task { denoise, deblock };
enum class TrainedMode { greedy, joint };

/// Orthonormal 2D DCT basis of size m x m with the constant atom removed,
/// ordered row-major over the (p,q) frequency pairs. Filters are trained as
/// coefficient vectors over these m^2-1 zero-mean atoms.
struct FilterBasis {
    int m = 0;
    std::vector<Kernel> atoms;

    int count() const { return int(atoms.size()); }
};

/// Parameters of one diffusion stage: per-filter basis coefficients, one
/// influence mixture per filter, and the log reaction weight (denoising only;
/// deblocking reads the data term through proj_Q instead).
struct StageParams {
    std::vector<std::vector<double>> coeffs; // [n_k][m^2-1]
    std::vector<RbfMixture> mixtures;        // [n_k]
    double log_lambda = 0.0;

    double lambda() const;
};

struct TrdModel {
    Task task = Task::denoise;
    double sigma = 25.0; // denoise
    int quality = 10;    // deblock
    int stage_count = 0;
    int filter_size = 0;
    int filters_per_stage = 0;
    RbfConfig rbf;
    std::vector<StageParams> stages;
    TrainedMode trained_mode = TrainedMode::greedy;

    void validate() const;
};

/// Separable products of 1-D orthonormal DCT-II vectors, DC atom dropped.
/// m must be one of {3,5,7,9}.
FilterBasis build_basis(int m);

/// Linear combination of the basis atoms; coeff length must be m^2-1.
Kernel assemble_filter(const FilterBasis& basis, const std::vector<double>& coeff);

struct ModelConfig {
    Task task = Task::denoise;
    double sigma = 25.0;
    int quality = 10;
    int stages = 5;
    int filter_size = 5;
    int filters = 24;
    RbfConfig rbf = RbfConfig::make(RbfKind::gaussian, 63, 310.0);
};

/// Plain initialization: filter i = basis atom i, every mixture fitted to
/// 2z/(1+z^2), lambda = 0.1, identically across stages.
TrdModel init_model(const ModelConfig& config);

/// Versioned JSON with full-precision round-trip doubles.
void save_model(const TrdModel& model, const std::string& path);
TrdModel load_model(const std::string& path);

std::string model_to_json(const TrdModel& model);
TrdModel model_from_json(const std::string& text);

} // namespace trd
