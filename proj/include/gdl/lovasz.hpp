#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gdl {

struct LovaszResult {
    double value = 0.0;
    std::vector<double> grad;  ///< d value / d score, same length as the scores
};

/// Lovász hinge of the Jaccard loss for binary labels.
///
/// Hinge errors are m_i = 1 - s_i * score_i with s_i = +1 for positives and -1
/// for negatives. Errors are sorted in decreasing order (ties by ascending
/// position) and the positive parts are weighted by the increments of the
/// Jaccard loss over the growing prefix sets. The result is piecewise linear in
/// the scores; at ReLU kinks the zero branch is taken. Entries with exactly equal
/// errors get the mean increment over every order of their run, so at a tie the
/// gradient is the midpoint of the adjacent pieces.
LovaszResult lovasz_hinge(std::span<const double> scores, std::span<const std::uint8_t> labels);

}  // namespace gdl
