#pragma once

#include <cmath>
#include <cstdint>

#include "srlaser/model.hpp"

namespace testing {

inline double rel(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

inline srl::SystemParams sr88(std::int64_t n, double eta_over_gamma) {
    auto p = srl::preset("sr88");
    p.n_atoms = n;
    p.eta = eta_over_gamma * p.gamma;
    return p;
}

/// g = kappa/4, gamma = kappa/100, eta = 20 gamma.
inline srl::SystemParams desk(std::int64_t n) {
    srl::SystemParams p;
    p.n_atoms = n;
    p.kappa = 1.0;
    p.g = 0.25;
    p.gamma = 0.01;
    p.eta = 0.2;
    return p;
}

}  // namespace testing
