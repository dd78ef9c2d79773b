#pragma once

#include <Eigen/Dense>
#include <string>

#include "certilip/errors.hpp"

namespace certilip {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Norm order of the perturbation; q below is the dual exponent (1/p + 1/q = 1).
enum class Norm { l1, l2, linf };

inline double lp_norm(const Vector& v, Norm p) {
    switch (p) {
    case Norm::l1:
        return v.lpNorm<1>();
    case Norm::l2:
        return v.norm();
    case Norm::linf:
        return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
    }
    throw_invalid("unknown norm order");
}

inline Norm dual_norm(Norm p) {
    switch (p) {
    case Norm::l1:
        return Norm::linf;
    case Norm::l2:
        return Norm::l2;
    case Norm::linf:
        return Norm::l1;
    }
    throw_invalid("unknown norm order");
}

inline std::string norm_name(Norm p) {
    switch (p) {
    case Norm::l1:
        return "1";
    case Norm::l2:
        return "2";
    case Norm::linf:
        return "inf";
    }
    return "?";
}

inline Norm parse_norm(const std::string& s) {
    if (s == "1")
        return Norm::l1;
    if (s == "2")
        return Norm::l2;
    if (s == "inf" || s == "Inf" || s == "INF")
        return Norm::linf;
    throw_invalid("norm order must be one of {1, 2, inf}, got '" + s + "'");
}

} // namespace certilip
