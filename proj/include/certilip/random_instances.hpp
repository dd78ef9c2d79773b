#pragma once

#include <random>

#include "certilip/box_problem.hpp"
#include "certilip/model.hpp"

namespace certilip {

// Shared random-instance generators for the verification battery and tests.
// Box problems mix feasible and infeasible cases and include zero direction
// coordinates; models come out small enough for the enumeration oracles.

inline BoxLinearProblem random_box_problem(std::mt19937& rng, Eigen::Index d) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    BoxLinearProblem p;
    p.base_point.resize(d);
    p.direction.resize(d);
    for (Eigen::Index r = 0; r < d; ++r) {
        p.base_point[r] = unif(rng);
        p.direction[r] = unif(rng) < 0.2 ? 0.0 : gauss(rng);
    }
    double extreme = 0.0;
    for (Eigen::Index r = 0; r < d; ++r) {
        if (p.direction[r] > 0.0)
            extreme -= p.direction[r] * p.base_point[r];
        else if (p.direction[r] < 0.0)
            extreme += p.direction[r] * (1.0 - p.base_point[r]);
    }
    const double roll = unif(rng);
    if (roll < 0.1)
        p.gap = 0.5 * unif(rng); // already satisfied, delta = 0
    else
        p.gap = -unif(rng) * 1.25 * std::abs(extreme); // ~20% beyond the reachable extreme
    return p;
}

inline LinearModel random_linear_model(std::mt19937& rng, int classes, Eigen::Index d) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    LinearModel m;
    m.weights.resize(classes, d);
    for (Eigen::Index r = 0; r < m.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < d; ++c)
            m.weights(r, c) = gauss(rng);
    return m;
}

inline GaussianKernelModel random_kernel_model(std::mt19937& rng, Eigen::Index anchors,
                                               Eigen::Index d, int classes, double width) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    GaussianKernelModel m;
    m.width = width;
    m.anchors.resize(anchors, d);
    m.coefficients.resize(classes, anchors);
    for (Eigen::Index r = 0; r < anchors; ++r)
        for (Eigen::Index c = 0; c < d; ++c)
            m.anchors(r, c) = unif(rng);
    for (Eigen::Index r = 0; r < m.coefficients.rows(); ++r)
        for (Eigen::Index c = 0; c < anchors; ++c)
            m.coefficients(r, c) = gauss(rng);
    return m;
}

inline OneHiddenLayerModel random_network_model(std::mt19937& rng, Eigen::Index units,
                                                Eigen::Index d, int classes, double steepness,
                                                bool with_bias = false) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    OneHiddenLayerModel m;
    m.steepness = steepness;
    m.hidden_weights.resize(units, d);
    m.output_weights.resize(classes, units);
    for (Eigen::Index r = 0; r < units; ++r)
        for (Eigen::Index c = 0; c < d; ++c)
            m.hidden_weights(r, c) = gauss(rng);
    for (Eigen::Index r = 0; r < m.output_weights.rows(); ++r)
        for (Eigen::Index c = 0; c < units; ++c)
            m.output_weights(r, c) = gauss(rng);
    if (with_bias) {
        m.hidden_bias.resize(units);
        m.output_bias.resize(classes);
        for (Eigen::Index r = 0; r < units; ++r)
            m.hidden_bias[r] = gauss(rng);
        for (Eigen::Index r = 0; r < m.output_bias.size(); ++r)
            m.output_bias[r] = gauss(rng);
    }
    return m;
}

inline Vector random_unit_box_point(std::mt19937& rng, Eigen::Index d) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector x(d);
    for (Eigen::Index r = 0; r < d; ++r)
        x[r] = unif(rng);
    return x;
}

} // namespace certilip
