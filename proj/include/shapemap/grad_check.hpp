#pragma once

#include <functional>

#include "shapemap/rng.hpp"
#include "shapemap/tensor.hpp"

namespace shapemap {

// Central-difference check of the reverse-mode gradient of a scalar function.
// f must rebuild its graph on every call (x's values change between calls).
// Returns the maximum over checked coordinates of
//   |analytic - numeric| / max(1, |analytic|, |numeric|).
// max_coords == 0 checks every coordinate; a positive value checks a random
// subset of that size (coord_rng must then be provided), which keeps the
// check affordable on large inputs such as whole images.
double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor& x, double h = 1e-5,
                  int max_coords = 0, Rng* coord_rng = nullptr);

}  // namespace shapemap
