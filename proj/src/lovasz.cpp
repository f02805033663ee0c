#include "gdl/lovasz.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gdl/error.hpp"

namespace gdl {

namespace {

// Runs of exactly equal errors longer than this keep the position order.
constexpr std::size_t kMaxAveragedRun = 256;

// Jaccard loss of a prefix holding `pos` positives and `neg` negatives.
double jaccard(double positives, double pos, double neg) {
    const double uni = positives + neg;
    return uni == 0.0 ? 0.0 : 1.0 - (positives - pos) / uni;
}

double log_choose(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

// Mean Jaccard increment of one element of label `y` over all orders of a tied run
// holding `run_pos` positives and `run_neg` negatives after a prefix (p0, q0).
double mean_increment(double positives, double p0, double q0, int run_pos, int run_neg, bool y) {
    const int other_pos = run_pos - (y ? 1 : 0);
    const int other_neg = run_neg - (y ? 0 : 1);
    const int others = other_pos + other_neg;
    double mean = 0.0;
    for (int j = 0; j <= other_pos; ++j)
        for (int l = 0; l <= other_neg; ++l) {
            // P(exactly j positives and l negatives precede the element).
            const double logp = log_choose(other_pos, j) + log_choose(other_neg, l) - log_choose(others, j + l) -
                                std::log(static_cast<double>(others + 1));
            const double before = jaccard(positives, p0 + j, q0 + l);
            const double after = jaccard(positives, p0 + j + (y ? 1 : 0), q0 + l + (y ? 0 : 1));
            mean += std::exp(logp) * (after - before);
        }
    return mean;
}

}  // namespace

LovaszResult lovasz_hinge(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
    const std::size_t p = scores.size();
    LovaszResult out;
    out.grad.assign(p, 0.0);
    if (p == 0) return out;

    std::vector<double> errors(p);
    double positives = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        const double sign = labels[i] ? 1.0 : -1.0;
        errors[i] = 1.0 - sign * scores[i];
        positives += labels[i] ? 1.0 : 0.0;
    }
    std::vector<std::size_t> perm(p);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return errors[a] > errors[b]; });

    double pos_in_prefix = 0.0, neg_in_prefix = 0.0;
    for (std::size_t r0 = 0; r0 < p;) {
        const double err = errors[perm[r0]];
        std::size_t r1 = r0 + 1;
        while (r1 < p && errors[perm[r1]] == err) ++r1;
        int run_pos = 0, run_neg = 0;
        for (std::size_t r = r0; r < r1; ++r) (labels[perm[r]] ? run_pos : run_neg) += 1;

        const double start = jaccard(positives, pos_in_prefix, neg_in_prefix);
        if (err > 0.0) {
            // The value only depends on the run's total increment.
            out.value += err * (jaccard(positives, pos_in_prefix + run_pos, neg_in_prefix + run_neg) - start);
            if (r1 - r0 == 1 || r1 - r0 > kMaxAveragedRun) {
                double pos = pos_in_prefix, neg = neg_in_prefix, prev = start;
                for (std::size_t r = r0; r < r1; ++r) {
                    const std::size_t idx = perm[r];
                    (labels[idx] ? pos : neg) += 1.0;
                    const double jac = jaccard(positives, pos, neg);
                    out.grad[idx] = (labels[idx] ? -1.0 : 1.0) * (jac - prev);
                    prev = jac;
                }
            } else {
                // Tied errors: mean increment over every order of the run.
                const double wp = run_pos ? mean_increment(positives, pos_in_prefix, neg_in_prefix, run_pos, run_neg, true) : 0.0;
                const double wn = run_neg ? mean_increment(positives, pos_in_prefix, neg_in_prefix, run_pos, run_neg, false) : 0.0;
                for (std::size_t r = r0; r < r1; ++r) {
                    const std::size_t idx = perm[r];
                    out.grad[idx] = labels[idx] ? -wp : wn;
                }
            }
        }
        pos_in_prefix += run_pos;
        neg_in_prefix += run_neg;
        r0 = r1;
    }
    return out;
}

}  // namespace gdl
