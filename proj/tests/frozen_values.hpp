#pragma once

// Reference numbers printed by tests/oracles/derive.py.

namespace frozen {

// Guarded knapsack c=(0.5,1.25,0.75), a=(2,3,4), b=5 under
// V(k, xi) = 0.3 k - 0.05 s + 0.2 (s = suffix as an integer, bit j-1 = xi_j).
inline constexpr double kKnapsackPsi = 1.8;
inline constexpr double kKnapsackPhi = 0.6500000000000001;
inline constexpr double kKnapsackOptimum = 1.75;

// Max-cut R = [[0,2,-1],[0.5,0,3],[1,1,0]].
inline constexpr double kMaxCutRoot = 3.5;

inline constexpr double kSmoothMax_0_1_a2 = 0.8807970779778824;
inline constexpr double kSmoothMax_m15_025_a3 = 0.2408647800362728;

}  // namespace frozen
