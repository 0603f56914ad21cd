#pragma once

#include <vector>

#include "trd/image.hpp"

namespace trd {

enum class RbfKind { gaussian, triangular };

/// Shared geometry of one radial basis family: M equidistant centers on
/// [-radius, radius] with a single scale gamma. gamma defaults to the center
/// spacing, which makes neighboring Gaussian atoms overlap at exp(-1/2).
struct RbfConfig {
    RbfKind kind = RbfKind::gaussian;
    int count = 63;
    double radius = 310.0;
    double gamma = 0.0; // 0 -> spacing

    static RbfConfig make(RbfKind kind, int count, double radius, double gamma = 0.0);

    double spacing() const { return 2.0 * radius / (count - 1); }
    double center(int j) const { return -radius + j * spacing(); }
    void validate() const;
};

/// One influence function phi: a weighted combination of the config's atoms.
struct RbfMixture {
    RbfConfig config;
    std::vector<double> weights;

    RbfMixture() = default;
    RbfMixture(RbfConfig cfg, std::vector<double> w);
};

/// All M atom values at z. These equal d(phi)/d(w_j), so training reuses them
/// as-is for the weight gradients.
void basis_eval(const RbfConfig& cfg, double z, double* out);
std::vector<double> basis_eval(const RbfConfig& cfg, double z);

/// Atom derivatives at z. Triangular atoms use the left-limit slope at kinks.
void basis_deriv(const RbfConfig& cfg, double z, double* out);

double phi_eval(const RbfMixture& mix, double z);
double phi_deriv(const RbfMixture& mix, double z);

/// Pointwise phi over a whole image.
Image phi_map(const RbfMixture& mix, const Image& img);

/// Least-squares weights for samples (z_k, y_k), normal equations with a
/// 1e-8 ridge. Requires at least M samples.
RbfMixture fit_weights(const RbfConfig& cfg, const std::vector<double>& zs,
                       const std::vector<double>& ys);

/// The paper's plain-init influence shape.
inline double plain_influence(double z) { return 2.0 * z / (1.0 + z * z); }

/// Mixture fitted to 2z/(1+z^2) on 1000 equidistant samples over [-R, R].
RbfMixture fit_plain_influence(const RbfConfig& cfg);

/// Penalty value rho(z) = integral of phi from 0 to z, trapezoid rule with
/// step gamma/10 (last interval partial). rho(0) = 0.
double rho_eval(const RbfMixture& mix, double z);

} // namespace trd
