#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace volrace::optimize {

using Objective = std::function<double(const std::vector<double>&)>;

struct NelderMeadOptions {
    double initial_step = 0.1;
    double f_tolerance = 1e-10;  // spread of simplex values
    double x_tolerance = 1e-9;   // simplex diameter, absolute
    std::size_t max_evaluations = 20000;
    std::size_t restarts = 4;  // re-inflate the simplex around the best vertex
};

struct Minimum {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

// Unconstrained downhill simplex minimization. Non-finite objective values are
// treated as +infinity, so an objective may signal infeasibility that way.
Minimum nelder_mead(const Objective& f, std::vector<double> start, const NelderMeadOptions& options = {});

// Newton iterations on the gradient from a point already near a minimum.
// Coordinate i is scaled by max(|x_i|, scale_floor[i]); derivative steps are
// `rel_step` times that scale. A step is kept only if it shrinks the scaled
// gradient max-norm without raising the objective beyond rounding noise.
struct PolishResult {
    std::vector<double> x;
    double value = 0.0;
    double scaled_gradient = 0.0;  // max_i |df/dx_i| * scale_i at x
    std::size_t evaluations = 0;
};
PolishResult newton_polish(const Objective& f, std::vector<double> start, const std::vector<double>& scale_floor,
                           std::size_t max_iterations = 6, double rel_step = 1e-5);

// Central-difference gradient and Hessian. `steps[i]` is the absolute step for
// coordinate i.
std::vector<double> gradient(const Objective& f, const std::vector<double>& x, const std::vector<double>& steps);
std::vector<std::vector<double>> hessian(const Objective& f, const std::vector<double>& x,
                                         const std::vector<double>& steps);

}  // namespace volrace::optimize
