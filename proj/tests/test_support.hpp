#pragma once
// Shared fixtures for the test suite.

#include <cmath>
#include <rotorlab/circle_map.hpp>
#include <string>
#include <vector>

namespace rotorlab::testing {

// Derivative proportional to 1.5 + 0.5 sin(1/(x - 1/2)): bounded away from 0
// but with unbounded total variation of its logarithm near x = 1/2.
class OscillatoryMap final : public CircleMap {
public:
    OscillatoryMap() {
        bump_.assign(kCells + 1, 0.0);
        double h = 1.0 / kCells;
        for (int i = 0; i < kCells; ++i) {
            double a = i * h, b = a + h;
            bump_[static_cast<std::size_t>(i) + 1] =
                bump_[static_cast<std::size_t>(i)] +
                0.5 * h * (raw(a) + raw(b)) - h;  // deviation from slope 1
        }
        drift_ = bump_.back();
    }

    double lift(double x, Side) const override {
        double w = std::floor(x), t = x - w;
        double u = t * kCells;
        int i = std::min(static_cast<int>(u), kCells - 1);
        double fracpart = u - i;
        double dev = bump_[static_cast<std::size_t>(i)] * (1.0 - fracpart) +
                     bump_[static_cast<std::size_t>(i) + 1] * fracpart - drift_ * t;
        return w + t + dev;
    }

    double derivative(double x, Side) const override { return raw(frac(x)) - drift_; }
    std::string kind() const override { return "oscillatory"; }

private:
    static double raw(double t) {
        double u = t - 0.5;
        if (u == 0.0) return 1.0;
        return (1.5 + 0.5 * std::sin(1.0 / u)) / 1.5;
    }

    static constexpr int kCells = 4096;
    std::vector<double> bump_;
    double drift_ = 0.0;
};

}  // namespace rotorlab::testing
