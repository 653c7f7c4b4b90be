#include "volrace/optimize.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace volrace::optimize {

namespace {

double guarded(const Objective& f, const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

struct Simplex {
    std::vector<std::vector<double>> pts;
    std::vector<double> vals;
};

Minimum run_simplex(const Objective& f, const std::vector<double>& start, double step,
                    const NelderMeadOptions& opt, std::size_t budget) {
    const std::size_t n = start.size();
    Simplex s;
    s.pts.assign(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) {
        s.pts[i + 1][i] += (start[i] != 0.0 ? step * std::max(1.0, std::abs(start[i])) : step);
    }
    std::size_t evals = 0;
    s.vals.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        s.vals[i] = guarded(f, s.pts[i]);
        ++evals;
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    bool converged = false;

    while (evals < budget) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s.vals[a] < s.vals[b]; });
        const auto best = order.front();
        const auto worst = order.back();
        const auto second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                diameter = std::max(diameter, std::abs(s.pts[i][k] - s.pts[best][k]));
            }
        }
        if (std::isfinite(s.vals[worst]) && s.vals[worst] - s.vals[best] <= opt.f_tolerance &&
            diameter <= opt.x_tolerance * 1e3) {
            converged = true;
            break;
        }
        if (diameter <= opt.x_tolerance) {
            converged = std::isfinite(s.vals[best]);
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < n; ++k) centroid[k] += s.pts[i][k] / static_cast<double>(n);
        }
        auto along = [&](double coef, std::vector<double>& out) {
            for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + coef * (s.pts[worst][k] - centroid[k]);
            ++evals;
            return guarded(f, out);
        };

        const double fr = along(-1.0, trial);
        if (fr < s.vals[best]) {
            const double fe = along(-2.0, trial2);
            if (fe < fr) {
                s.pts[worst] = trial2;
                s.vals[worst] = fe;
            } else {
                s.pts[worst] = trial;
                s.vals[worst] = fr;
            }
            continue;
        }
        if (fr < s.vals[second]) {
            s.pts[worst] = trial;
            s.vals[worst] = fr;
            continue;
        }
        const bool outside = fr < s.vals[worst];
        const double fc = along(outside ? -0.5 : 0.5, trial2);
        if (fc < std::min(fr, s.vals[worst])) {
            s.pts[worst] = trial2;
            s.vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < n; ++k) s.pts[i][k] = s.pts[best][k] + 0.5 * (s.pts[i][k] - s.pts[best][k]);
            s.vals[i] = guarded(f, s.pts[i]);
            ++evals;
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(s.vals.begin(), s.vals.end()) - s.vals.begin());
    return {s.pts[best], s.vals[best], evals, converged};
}

}  // namespace

Minimum nelder_mead(const Objective& f, std::vector<double> start, const NelderMeadOptions& options) {
    Minimum best = run_simplex(f, start, options.initial_step, options, options.max_evaluations);
    std::size_t total = best.evaluations;
    double step = options.initial_step;
    for (std::size_t r = 0; r < options.restarts && total < options.max_evaluations; ++r) {
        step *= 0.5;
        auto next = run_simplex(f, best.x, step, options, options.max_evaluations - total);
        total += next.evaluations;
        const bool improved = next.value < best.value - options.f_tolerance;
        if (next.value <= best.value) {
            next.evaluations = total;
            best = std::move(next);
        }
        if (!improved && best.converged) break;
    }
    best.evaluations = total;
    return best;
}

PolishResult newton_polish(const Objective& f, std::vector<double> x, const std::vector<double>& scale_floor,
                           std::size_t max_iterations, double rel_step) {
    const auto n = static_cast<Eigen::Index>(x.size());
    PolishResult out;
    auto scales = [&](const std::vector<double>& p) {
        std::vector<double> sc(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) sc[i] = std::max(std::abs(p[i]), scale_floor[i]);
        return sc;
    };
    auto scaled_norm = [&](const std::vector<double>& g, const std::vector<double>& sc) {
        double m = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, std::abs(g[i] * sc[i]));
        return m;
    };
    auto steps_for = [&](const std::vector<double>& sc) {
        std::vector<double> st(sc.size());
        for (std::size_t i = 0; i < sc.size(); ++i) st[i] = rel_step * sc[i];
        return st;
    };

    double fx = guarded(f, x);
    auto sc = scales(x);
    auto g = gradient(f, x, steps_for(sc));
    out.evaluations = 1 + 2 * x.size();
    double gnorm = scaled_norm(g, sc);
    for (std::size_t it = 0; it < max_iterations && std::isfinite(fx) && std::isfinite(gnorm); ++it) {
        const auto h = hessian(f, x, steps_for(sc));
        out.evaluations += 1 + 2 * x.size() * x.size();
        Eigen::VectorXd G(n);
        Eigen::MatrixXd H(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            G(i) = g[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < n; ++j) H(i, j) = h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        if (!H.allFinite()) break;
        Eigen::LLT<Eigen::MatrixXd> llt(H);
        if (llt.info() != Eigen::Success) break;
        const Eigen::VectorXd d = -llt.solve(G);
        bool accepted = false;
        for (double t = 1.0; t > 1e-3; t *= 0.5) {
            auto trial = x;
            for (Eigen::Index i = 0; i < n; ++i) trial[static_cast<std::size_t>(i)] += t * d(i);
            const double ft = guarded(f, trial);
            ++out.evaluations;
            if (!(ft <= fx + 1e-13 * std::max(1.0, std::abs(fx)))) continue;
            const auto tsc = scales(trial);
            auto tg = gradient(f, trial, steps_for(tsc));
            out.evaluations += 2 * x.size();
            const double tnorm = scaled_norm(tg, tsc);
            if (tnorm < gnorm) {
                x = std::move(trial);
                fx = std::min(fx, ft);
                sc = tsc;
                g = std::move(tg);
                gnorm = tnorm;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    out.x = std::move(x);
    out.value = fx;
    out.scaled_gradient = gnorm;
    return out;
}

std::vector<double> gradient(const Objective& f, const std::vector<double>& x, const std::vector<double>& steps) {
    std::vector<double> g(x.size());
    auto xp = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + steps[i];
        const double fp = f(xp);
        xp[i] = x[i] - steps[i];
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * steps[i]);
    }
    return g;
}

std::vector<std::vector<double>> hessian(const Objective& f, const std::vector<double>& x,
                                         const std::vector<double>& steps) {
    const std::size_t n = x.size();
    std::vector<std::vector<double>> h(n, std::vector<double>(n, 0.0));
    const double f0 = f(x);
    auto xp = x;
    for (std::size_t i = 0; i < n; ++i) {
        xp[i] = x[i] + steps[i];
        const double fp = f(xp);
        xp[i] = x[i] - steps[i];
        const double fm = f(xp);
        xp[i] = x[i];
        h[i][i] = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
        for (std::size_t j = 0; j < i; ++j) {
            double acc = 0.0;
            for (int si : {1, -1}) {
                for (int sj : {1, -1}) {
                    xp[i] = x[i] + si * steps[i];
                    xp[j] = x[j] + sj * steps[j];
                    acc += si * sj * f(xp);
                }
            }
            xp[i] = x[i];
            xp[j] = x[j];
            h[i][j] = h[j][i] = acc / (4.0 * steps[i] * steps[j]);
        }
    }
    return h;
}

}  // namespace volrace::optimize
