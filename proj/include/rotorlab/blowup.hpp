#pragma once
// Assembles blown-up torus fields and retunes the base slope so the induced
// return map realises the requested rotation angle.  Inserting a cell drags
// the winding of nearby orbits, so the raw slope no longer produces the
// target angle; a bisection on the slope against the measured rotation
// number of the sampled return map compensates.  Iterating the sampled map
// keeps the measurement meaningful across capture windows, where plateaus
// continue the dynamics that direct flow orbits cannot (they fall into the
// trapping cell and stop).

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "rotorlab/return_map.hpp"
#include "rotorlab/rotation_number.hpp"
#include "rotorlab/torus_field.hpp"

namespace rotorlab {

struct BlowupBuildOptions {
    double rho_tol = 1e-6;       // |measured angle - target| acceptance
    double slope_window = 5e-4;  // initial half-width of the slope bracket
    int max_steps = 48;          // bracket growth plus bisection budget
    i64 rho_iterates = 0;        // 0: derived so the certified radius is rho_tol/2
    double section_x = 0.0;      // vertical section carrying the induced map
    ReturnMapOptions map{};
};

struct BlowupResult {
    std::shared_ptr<BlownUpField> field;
    std::shared_ptr<SampledMonotoneMap> map;  // induced on the section
    double slope = 0.0;       // tuned base slope
    double rho = 0.0;         // measured rotation number of `map`
    double rho_radius = 0.0;  // certified radius of the measurement
    int evaluations = 0;      // induced maps built during tuning
};

// Build a blown-up field whose induced return map has rotation number equal
// to the handle's angle within `rho_tol`.  With no seeds the linear field
// already realises the angle and the slope is left untouched.
inline BlowupResult build_blowup(const AlphaHandle& handle, const std::vector<Vec2>& seeds,
                                 const std::vector<CellDirection>& kinds,
                                 const std::vector<double>& widths,
                                 const BlowupBuildOptions& opt = {}) {
    require(opt.rho_tol > 1e-12 && opt.rho_tol < 0.1, "build_blowup: bad angle tolerance");
    require(opt.slope_window > 0.0 && opt.slope_window < 0.1,
            "build_blowup: bad slope window");
    require(opt.max_steps >= 8, "build_blowup: step budget too small");

    double alpha = handle.approx();
    auto loop = TransverseLoop::vertical(opt.section_x);
    i64 n = opt.rho_iterates > 0 ? opt.rho_iterates
                                 : static_cast<i64>(std::ceil(2.0 / opt.rho_tol));

    BlowupResult out;
    auto eval = [&](double beta) -> double {
        out.field = assemble_blowup(handle, beta, seeds, kinds, widths);
        out.map = induced_return_map(*out.field, loop, opt.map);
        auto est = estimate_rotation(*out.map, 0.1, n);
        out.slope = beta;
        out.rho = est.value;
        out.rho_radius = est.radius;
        ++out.evaluations;
        return est.value - alpha;
    };

    double resid = eval(alpha);
    if (seeds.empty() || std::fabs(resid) + out.rho_radius <= opt.rho_tol) {
        out.field->set_tuning_residual(resid);
        return out;
    }

    // Grow a bracket [b_lo, b_hi] with the residual changing sign across it.
    double b_lo = alpha, b_hi = alpha;
    double r_lo = resid, r_hi = resid;
    double w = opt.slope_window;
    int steps = 1;
    while (r_lo * r_hi > 0.0) {
        require(steps < opt.max_steps && w < 0.1,
                "build_blowup: could not bracket the target angle");
        double beta = resid < 0.0 ? alpha + w : alpha - w;
        double r = eval(beta);
        ++steps;
        if (resid < 0.0) {
            b_hi = beta;
            r_hi = r;
        } else {
            b_lo = beta;
            r_lo = r;
        }
        w *= 2.0;
    }
    if (b_lo > b_hi) {
        std::swap(b_lo, b_hi);
        std::swap(r_lo, r_hi);
    }

    // Bisect the slope until a measurement certifies the angle.
    for (; steps < opt.max_steps; ++steps) {
        double beta = 0.5 * (b_lo + b_hi);
        double r = eval(beta);
        if (std::fabs(r) + out.rho_radius <= opt.rho_tol) {
            out.field->set_tuning_residual(r);
            return out;
        }
        require(b_hi - b_lo > 1e-15, "build_blowup: slope bracket collapsed before the "
                                     "angle converged");
        if ((r < 0.0) == (r_lo < 0.0)) {
            b_lo = beta;
            r_lo = r;
        } else {
            b_hi = beta;
            r_hi = r;
        }
    }
    fail("build_blowup: step budget exhausted before the angle converged");
}

}  // namespace rotorlab
