#include "trd/influence.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace trd {

RbfConfig RbfConfig::make(RbfKind kind, int count, double radius, double gamma) {
    RbfConfig cfg;
    cfg.kind = kind;
    cfg.count = count;
    cfg.radius = radius;
    cfg.gamma = gamma > 0.0 ? gamma : 2.0 * radius / (count - 1);
    cfg.validate();
    return cfg;
}

void RbfConfig::validate() const {
    if (count < 2) throw DataError("RbfConfig: count must be >= 2");
    if (!(radius > 0.0)) throw DataError("RbfConfig: radius must be > 0");
    if (!(gamma > 0.0)) throw DataError("RbfConfig: gamma must be > 0");
}

RbfMixture::RbfMixture(RbfConfig cfg, std::vector<double> w)
    : config(cfg), weights(std::move(w)) {
    config.validate();
    if (weights.size() != size_t(config.count))
        throw DataError("RbfMixture: weights length must equal config.count");
    for (double v : weights)
        if (!std::isfinite(v)) throw DataError("RbfMixture: weights must be finite");
}

void basis_eval(const RbfConfig& cfg, double z, double* out) {
    const double g = cfg.gamma;
    const double step = cfg.spacing();
    double mu = -cfg.radius;
    if (cfg.kind == RbfKind::gaussian) {
        const double inv2g2 = 1.0 / (2.0 * g * g);
        for (int j = 0; j < cfg.count; ++j, mu += step) {
            double d = z - mu;
            out[j] = std::exp(-d * d * inv2g2);
        }
    } else {
        for (int j = 0; j < cfg.count; ++j, mu += step) {
            double d = std::abs(z - mu) / g;
            out[j] = d < 1.0 ? 1.0 - d : 0.0;
        }
    }
}

std::vector<double> basis_eval(const RbfConfig& cfg, double z) {
    std::vector<double> out(cfg.count);
    basis_eval(cfg, z, out.data());
    return out;
}

void basis_deriv(const RbfConfig& cfg, double z, double* out) {
    const double g = cfg.gamma;
    const double step = cfg.spacing();
    double mu = -cfg.radius;
    if (cfg.kind == RbfKind::gaussian) {
        const double inv2g2 = 1.0 / (2.0 * g * g);
        const double invg2 = 1.0 / (g * g);
        for (int j = 0; j < cfg.count; ++j, mu += step) {
            double d = z - mu;
            out[j] = -d * invg2 * std::exp(-d * d * inv2g2);
        }
    } else {
        // left-limit slope: rising on (mu-g, mu], falling on (mu, mu+g]
        for (int j = 0; j < cfg.count; ++j, mu += step) {
            double d = z - mu;
            if (d > -g && d <= 0.0)
                out[j] = 1.0 / g;
            else if (d > 0.0 && d <= g)
                out[j] = -1.0 / g;
            else
                out[j] = 0.0;
        }
    }
}

namespace {
double dot_with_basis(const RbfMixture& mix, double z, bool deriv) {
    thread_local std::vector<double> buf;
    buf.resize(mix.config.count);
    if (deriv)
        basis_deriv(mix.config, z, buf.data());
    else
        basis_eval(mix.config, z, buf.data());
    double acc = 0.0;
    for (int j = 0; j < mix.config.count; ++j) acc += mix.weights[j] * buf[j];
    return acc;
}
} // namespace

double phi_eval(const RbfMixture& mix, double z) { return dot_with_basis(mix, z, false); }
double phi_deriv(const RbfMixture& mix, double z) { return dot_with_basis(mix, z, true); }

Image phi_map(const RbfMixture& mix, const Image& img) {
    Image out(img.height, img.width);
    for (size_t i = 0; i < img.size(); ++i) out.data[i] = phi_eval(mix, img.data[i]);
    return out;
}

RbfMixture fit_weights(const RbfConfig& cfg, const std::vector<double>& zs,
                       const std::vector<double>& ys) {
    cfg.validate();
    if (zs.size() != ys.size()) throw DataError("fit_weights: sample size mismatch");
    const int n = int(zs.size());
    const int m = cfg.count;
    if (n < m) throw DataError("fit_weights: need at least M samples");

    Eigen::MatrixXd a(n, m);
    Eigen::VectorXd y(n);
    std::vector<double> row(m);
    for (int i = 0; i < n; ++i) {
        basis_eval(cfg, zs[i], row.data());
        for (int j = 0; j < m; ++j) a(i, j) = row[j];
        y(i) = ys[i];
    }
    Eigen::MatrixXd ata = a.transpose() * a;
    ata.diagonal().array() += 1e-8;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(ata);
    if (ldlt.info() != Eigen::Success)
        throw NumericError("fit_weights: normal equations factorization failed");
    Eigen::VectorXd w = ldlt.solve(a.transpose() * y);
    if (!w.allFinite()) throw NumericError("fit_weights: non-finite solution");
    return RbfMixture(cfg, std::vector<double>(w.data(), w.data() + m));
}

RbfMixture fit_plain_influence(const RbfConfig& cfg) {
    const int n = 1000;
    std::vector<double> zs(n), ys(n);
    for (int i = 0; i < n; ++i) {
        double z = -cfg.radius + 2.0 * cfg.radius * i / (n - 1);
        zs[i] = z;
        ys[i] = plain_influence(z);
    }
    return fit_weights(cfg, zs, ys);
}

double rho_eval(const RbfMixture& mix, double z) {
    if (z == 0.0) return 0.0;
    const double step = mix.config.gamma / 10.0;
    const double sign = z > 0.0 ? 1.0 : -1.0;
    const double len = std::abs(z);
    const long full = long(len / step);
    double acc = 0.0;
    double prev = phi_eval(mix, 0.0);
    for (long k = 1; k <= full; ++k) {
        double cur = phi_eval(mix, sign * double(k) * step);
        acc += 0.5 * (prev + cur) * step;
        prev = cur;
    }
    double rest = len - double(full) * step;
    if (rest > 0.0) {
        double cur = phi_eval(mix, z);
        acc += 0.5 * (prev + cur) * rest;
    }
    return sign * acc;
}

} // namespace trd
