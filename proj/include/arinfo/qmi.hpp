#pragma once

#include <optional>
#include <random>

#include "arinfo/matcore.hpp"

namespace arinfo {

/// Partitioned symmetric matrix defining the solution sets
///   Z_r(P)  = { Z : [I; Z]^T P [I; Z] >= 0 },
///   Z_r+(P) = { Z : [I; Z]^T P [I; Z] >  0 },
/// with Z of shape r x q.
using QmiMatrix = PartitionedSym;

struct PiClassCertificate {
  bool pi22_negsemidef = false;
  bool schur_psd = false;
  bool kernel_ok = false;
  bool member() const { return pi22_negsemidef && schur_psd && kernel_ok; }
};

PiClassCertificate in_pi_class(const QmiMatrix& p);

/// [I; Z]^T P [I; Z].
Matrix qmi_value(const Matrix& z, const QmiMatrix& p);

bool member_zr(const Matrix& z, const QmiMatrix& p, bool strict,
               double margin = 0.0);

/// Nonemptiness of Z_r (strict = false) or Z_r+ (strict = true).
/// Throws kNotInPiClass when P fails the class test.
bool nonempty(const QmiMatrix& p, bool strict);

/// -P22^+ P21, the center of the solution set.
Matrix qmi_center(const QmiMatrix& p);

/// Z = -P22^+ P21 + ((-P22)^+)^{1/2} S (P|P22)^{1/2} + (I - P22^+ P22) T.
Matrix parametrize_strict(const QmiMatrix& p, const Matrix& s, const Matrix& t);

/// S = A B^+ with A = S B and S^T S < I.
Matrix contraction_factor(const Matrix& a, const Matrix& b);

/// P_W = diag(W, I)^T P diag(W, I).
QmiMatrix project(const QmiMatrix& p, const Matrix& w);

/// Maximizes lambda_min(M - alpha N) over alpha >= 0; returns alpha when the
/// maximum exceeds 1e-8 max(||M||, 1).
std::optional<double> slemma_find_alpha(const QmiMatrix& m,
                                        const QmiMatrix& n);

/// Random r x q matrix with spectral norm exactly `norm`.
Matrix random_contraction(int rows, int cols, double norm, std::mt19937_64& rng);

/// Random member of Z_r+(P) via parametrize_strict with ||S|| = s_norm and a
/// Gaussian T.
Matrix sample_strict_member(const QmiMatrix& p, double s_norm,
                            std::mt19937_64& rng);

}  // namespace arinfo
