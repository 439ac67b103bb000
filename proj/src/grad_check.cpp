#include "shapemap/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace shapemap {

double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor& x, double h,
                  int max_coords, Rng* coord_rng) {
    if (h <= 0.0) throw ValidationError("grad_check: step must be positive");
    Tensor probe = x.detached_copy(/*requires_grad=*/true);

    Tensor loss = f(probe);
    if (loss.numel() != 1) throw DimensionError("grad_check: f must return a scalar");
    if (!std::isfinite(loss.item())) throw Error("grad_check: non-finite f(x)");
    loss.backward();
    const std::vector<double> analytic = probe.grad();

    std::vector<int> coords(probe.numel());
    std::iota(coords.begin(), coords.end(), 0);
    if (max_coords > 0 && max_coords < probe.numel()) {
        if (!coord_rng) throw ValidationError("grad_check: sampled mode needs an rng");
        std::shuffle(coords.begin(), coords.end(), *coord_rng);
        coords.resize(static_cast<size_t>(max_coords));
    }

    NoGradGuard eval_only;  // finite differences need values, not graphs
    double worst = 0.0;
    auto& values = probe.data();
    for (int i : coords) {
        const double saved = values[static_cast<size_t>(i)];
        values[static_cast<size_t>(i)] = saved + h;
        const double up = f(probe).item();
        values[static_cast<size_t>(i)] = saved - h;
        const double down = f(probe).item();
        values[static_cast<size_t>(i)] = saved;
        if (!std::isfinite(up) || !std::isfinite(down))
            throw Error("grad_check: non-finite f(x) near coordinate " + std::to_string(i));
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic[static_cast<size_t>(i)];
        const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace shapemap
