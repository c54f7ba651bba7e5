#pragma once
// Hand trace of the fused controller on a two-model, two-state toy.
//
//   A1 = [[0, 1], [0, 0]]    alpha1 = (1, 1)   k1 = 2
//   A2 = [[0, 1], [-2, -3]]  alpha2 = (2, 1)   k2 = 4
//   B  = (0, 1)^T for both, sign switching, lambda = 1
//   x = (1, 2), x_tilde = (0.5, 0.25)
//
// model 1: s1 = 0.5 + 0.25 = 0.75
//          alpha1 B = 1, alpha1 A1 = (0, 1), alpha1 A1 x = 2   -> u_e1 = -2
//          u_s1 = -2 * sign(0.75) = -2                         -> u1 = -4
// model 2: s2 = 1.0 + 0.25 = 1.25
//          alpha2 B = 1, alpha2 A2 = (0, 2) + (-2, -3) = (-2, -1)
//          alpha2 A2 x = -2 - 2 = -4                           -> u_e2 = 4
//          u_s2 = -4 * sign(1.25) = -4                         -> u2 = 0
// v = (0.5, 0.5):   u_g = -2,  S = 1.0
// v = (0.25, 0.75): u_g = -1,  S = 0.1875 + 0.9375 = 1.125

namespace oracle::smmc_toy {

inline constexpr double kX[2] = {1.0, 2.0};
inline constexpr double kXTilde[2] = {0.5, 0.25};
inline constexpr double kS[2] = {0.75, 1.25};
inline constexpr double kUEq[2] = {-2.0, 4.0};
inline constexpr double kUSw[2] = {-2.0, -4.0};
inline constexpr double kU[2] = {-4.0, 0.0};

struct Case {
  double v1, v2, u_g, fused_s;
};
inline constexpr Case kHalf{0.5, 0.5, -2.0, 1.0};
inline constexpr Case kSkewed{0.25, 0.75, -1.0, 1.125};

}  // namespace oracle::smmc_toy
