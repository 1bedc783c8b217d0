#pragma once

#include <vector>

#include "arinfo/matcore.hpp"

namespace arinfo {

/// Quadratic difference form
///   Q_Phi(w)(t) = sum_{k,l=0}^{N} w(t+k)^T Phi_{kl} w(t+l)
/// stored by its full coefficient matrix at degree bound N.
class Qdf {
 public:
  Qdf(int q, int degree_bound, const SymMatrix& phi);

  int q() const { return q_; }
  int degree_bound() const { return n_; }
  const SymMatrix& phi() const { return phi_; }
  Matrix block(int k, int l) const {
    return phi_.matrix().block(k * q_, l * q_, q_, q_);
  }

 private:
  int q_;
  int n_;
  SymMatrix phi_;
};

/// Signals are stored column-wise: w.col(t) = w(t).
double evaluate(const Qdf& f, const Matrix& w, int t);

/// Coefficient matrix of Q_Phi(w)(t+1) - Q_Phi(w)(t), degree bound N+1.
Qdf rate_of_change(const Qdf& f);

/// Degree reduction modulo y(t+L) + P_{L-1} y(t+L-1) + ... + P_0 y(t) = 0:
/// substitutes the highest shift first, down to degree L-1.
Qdf reduce_degree(const Qdf& f, const std::vector<Matrix>& p);

enum class Sign { kNonneg, kPos, kNonpos, kNeg };

/// Sign of the QDF on the behavior of the autonomous system P. Uses that the
/// first L samples of a trajectory are free.
bool sign_on_behavior(const Qdf& f, const std::vector<Matrix>& p, Sign mode);

}  // namespace arinfo
