#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rsg/error.hpp"
#include "rsg/tape.hpp"

namespace rsg {

struct GradCheckResult {
    std::vector<double> max_rel_error;  // one entry per checked argument

    double overall() const {
        double m = 0.0;
        for (double e : max_rel_error) m = std::max(m, e);
        return m;
    }
    bool pass(double tol) const { return overall() <= tol; }
};

// Central-difference check of a scalar loss built from leaf arguments.
// build(tape, leaf_ids) must return a 1 x 1 node; analytic gradients come
// from tape.backward, numeric ones from f64 central differences with the
// given step. Relative error per element: |a - n| / max(1e-8, |a| + |n|).
inline GradCheckResult gradcheck(
    const std::function<int32_t(Taped&, const std::vector<int32_t>&)>& build,
    const std::vector<Tensord>& args, double h = 1e-5) {
    Taped tape;
    std::vector<int32_t> ids;
    ids.reserve(args.size());
    for (const auto& a : args) ids.push_back(tape.leaf(a));
    int32_t loss = build(tape, ids);
    require(tape.value(loss).rows() == 1 && tape.value(loss).cols() == 1,
            ErrorKind::ShapeMismatch, "gradcheck: loss must be 1 x 1");
    auto grads = tape.backward(loss);

    auto eval = [&](const std::vector<Tensord>& mod) {
        Taped t2;
        std::vector<int32_t> ids2;
        ids2.reserve(mod.size());
        for (const auto& a : mod) ids2.push_back(t2.leaf(a));
        return t2.value(build(t2, ids2)).at(0, 0);
    };

    GradCheckResult res;
    res.max_rel_error.assign(args.size(), 0.0);
    std::vector<Tensord> mod = args;
    for (size_t k = 0; k < args.size(); ++k) {
        for (size_t e = 0; e < args[k].data.size(); ++e) {
            double saved = mod[k].data[e];
            mod[k].data[e] = saved + h;
            double fp = eval(mod);
            mod[k].data[e] = saved - h;
            double fm = eval(mod);
            mod[k].data[e] = saved;

            double numeric = (fp - fm) / (2.0 * h);
            double analytic = grads[ids[k]] >= 0 ? tape.value(grads[ids[k]]).data[e] : 0.0;
            double rel = std::fabs(analytic - numeric) /
                         std::max(1e-8, std::fabs(analytic) + std::fabs(numeric));
            res.max_rel_error[k] = std::max(res.max_rel_error[k], rel);
        }
    }
    return res;
}

}  // namespace rsg
