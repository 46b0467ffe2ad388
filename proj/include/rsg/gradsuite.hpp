#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rsg {

struct GradSuiteEntry {
    std::string name;
    double max_rel_error = 0.0;
    bool pass = false;
};

// Central-difference gradient checks (f64, h = 1e-5) over every differentiable
// building block: face convolutions, residual blocks, pooling, dense/conv2d,
// the mapping network, the rasterizer color path, and the loss/regularizer
// terms (including the second-order R1 and path-length paths). Each op runs
// with three seeds (base_seed .. base_seed + 2); an entry passes when the
// worst relative error stays within `tolerance`.
std::vector<GradSuiteEntry> run_gradient_suite(uint64_t base_seed, double tolerance = 1e-4);

}  // namespace rsg
