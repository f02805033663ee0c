#pragma once

#include "gdl/vec2.hpp"

namespace gdl {

/// A loss value and its gradient with respect to every node coordinate.
struct LossResult {
    double value = 0.0;
    Gradient grad;

    static LossResult zeros(std::size_t n) { return {0.0, Gradient(n)}; }
};

}  // namespace gdl
