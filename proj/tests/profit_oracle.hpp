#pragma once

// Profit-based oracle for the four-firm Cournot game, typed in from the price
// and tax functions directly: firm i earns x_i p_i(s) - c_i(x_i).

#include <Eigen/Dense>

namespace heg::testing {

inline double price(int i, double s) {
  switch (i) {
    case 0: return 100 - 0.01 * s;
    case 1: return 110 - 0.02 * s;
    case 2: return 100 - 0.015 * s;
    default: return 115 - 0.05 * s;
  }
}

inline double tax(int i, double xi) {
  switch (i) {
    case 0: return 20 * xi;
    case 1: return 15 * xi + 100;
    case 2: return 17 * xi;
    default: return 20 * xi + 75;
  }
}

// phi(x, y) = -sum_i profit_i(x with its i-th entry replaced by y_i).
inline double phi(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double total = 0;
  for (int i = 0; i < 4; ++i) {
    const double s = x.sum() - x[i] + y[i];
    total -= y[i] * price(i, s) - tax(i, y[i]);
  }
  return total;
}

}  // namespace heg::testing
