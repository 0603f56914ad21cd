#include "trd/training.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace trd {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct CurvaturePair {
    std::vector<double> s, y;
    double rho;
};

// One strong-Wolfe line search along d from x. Returns the accepted step in
// alpha/fa/ga (point written into xa), or false on failure. Every evaluation
// also feeds the caller's best-so-far tracking through on_eval.
struct LineSearch {
    const std::function<double(const std::vector<double>&, std::vector<double>&)>& fg;
    const LbfgsConfig& cfg;
    const std::vector<double>& x;
    const std::vector<double>& d;
    double f0, d0; // value and directional derivative at alpha = 0
    std::vector<double> xa, ga;
    double alpha = 0.0, fa = 0.0, da = 0.0;
    std::function<void(const std::vector<double>&, double)> on_eval;

    // phi(alpha); non-finite values are treated as unacceptably large steps
    void eval(double a) {
        for (size_t i = 0; i < x.size(); ++i) xa[i] = x[i] + a * d[i];
        fa = fg(xa, ga);
        da = dot(ga, d);
        alpha = a;
        if (std::isfinite(fa)) on_eval(xa, fa);
    }

    bool armijo_ok() const {
        return std::isfinite(fa) && fa <= f0 + cfg.c1 * alpha * d0;
    }
    bool curvature_ok() const { return std::abs(da) <= -cfg.c2 * d0; }

    bool zoom(double lo, double flo, double dlo, double hi) {
        for (int i = 0; i < cfg.max_bisections; ++i) {
            eval(0.5 * (lo + hi));
            if (!armijo_ok() || fa >= flo) {
                hi = alpha;
                continue;
            }
            if (curvature_ok()) return true;
            if (da * (hi - lo) >= 0.0) hi = lo;
            lo = alpha;
            flo = fa;
            dlo = da;
        }
        (void)dlo;
        return false;
    }

    bool run(double first) {
        double prev_a = 0.0, prev_f = f0, prev_d = d0;
        double a = first;
        for (int i = 0; i < cfg.max_bisections; ++i) {
            eval(a);
            if (!armijo_ok() || (i > 0 && fa >= prev_f)) return zoom(prev_a, prev_f, prev_d, a);
            if (curvature_ok()) return true;
            if (da >= 0.0) return zoom(a, fa, da, prev_a);
            prev_a = a;
            prev_f = fa;
            prev_d = da;
            a *= 2.0;
        }
        return false;
    }
};

} // namespace

LbfgsResult lbfgs_minimize(
    const std::function<double(const std::vector<double>&, std::vector<double>&)>& fg,
    std::vector<double> x0, const LbfgsConfig& cfg) {
    const size_t n = x0.size();
    LbfgsResult res;
    std::vector<double> g(n), d(n);
    double f = fg(x0, g);
    if (!std::isfinite(f)) throw NumericError("lbfgs: objective is not finite at the start point");
    res.history.push_back(f);
    res.x = x0;
    res.f = f;

    std::vector<double> x = std::move(x0);
    std::deque<CurvaturePair> mem;

    auto track_best = [&](const std::vector<double>& xt, double ft) {
        if (ft < res.f) {
            res.f = ft;
            res.x = xt;
        }
    };

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        double gnorm = norm2(g);
        if (gnorm <= cfg.grad_tol * std::max(1.0, norm2(x))) {
            res.status = LbfgsStatus::gradient_converged;
            return res;
        }

        // two-loop recursion
        d = g;
        std::vector<double> alpha(mem.size());
        for (size_t i = mem.size(); i-- > 0;) {
            alpha[i] = mem[i].rho * dot(mem[i].s, d);
            for (size_t j = 0; j < n; ++j) d[j] -= alpha[i] * mem[i].y[j];
        }
        if (!mem.empty()) {
            const CurvaturePair& last = mem.back();
            double gamma = dot(last.s, last.y) / dot(last.y, last.y);
            for (double& v : d) v *= gamma;
        }
        for (size_t i = 0; i < mem.size(); ++i) {
            double beta = mem[i].rho * dot(mem[i].y, d);
            for (size_t j = 0; j < n; ++j) d[j] += (alpha[i] - beta) * mem[i].s[j];
        }
        for (double& v : d) v = -v;

        double d0 = dot(g, d);
        if (!(d0 < 0.0)) { // not a descent direction; fall back to steepest descent
            mem.clear();
            for (size_t j = 0; j < n; ++j) d[j] = -g[j];
            d0 = -gnorm * gnorm;
        }

        LineSearch ls{fg, cfg, x, d, f, d0, std::vector<double>(n), std::vector<double>(n),
                      0.0,  0.0, 0.0, track_best};
        double first = iter == 1 ? 1.0 / std::max(1.0, norm2(d)) : 1.0;
        if (!ls.run(first)) {
            res.status = LbfgsStatus::line_search_failed;
            return res;
        }

        std::vector<double> s(n), y(n);
        for (size_t j = 0; j < n; ++j) {
            s[j] = ls.xa[j] - x[j];
            y[j] = ls.ga[j] - g[j];
        }
        double sy = dot(s, y);
        if (sy > 1e-10 * norm2(s) * norm2(y)) {
            mem.push_back({std::move(s), std::move(y), 1.0 / sy});
            if (int(mem.size()) > cfg.memory) mem.pop_front();
        }

        x = ls.xa;
        f = ls.fa;
        g = ls.ga;
        if (!std::isfinite(f)) throw NumericError("lbfgs: objective became non-finite");
        res.history.push_back(f);
        track_best(x, f);
        res.iterations = iter;
    }
    res.status = LbfgsStatus::max_iterations;
    return res;
}

} // namespace trd
