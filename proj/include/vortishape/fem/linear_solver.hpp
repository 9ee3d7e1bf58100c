#pragma once

#include <stdexcept>
#include <string>

#include "vortishape/fem/space.hpp"

namespace vortishape::fem {

/// Raised for singular or failed factorizations. `pivot` is the unknown
/// whose pivot vanished, or -1 if unknown.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, int pivot) : std::runtime_error(what), pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

/// Sparse LU (UMFPACK). Solves with the matrix or its transpose.
/// The symbolic analysis is kept while the sparsity pattern is unchanged.
class DirectSolver {
 public:
  DirectSolver();
  ~DirectSolver();
  DirectSolver(const DirectSolver&) = delete;
  DirectSolver& operator=(const DirectSolver&) = delete;

  /// `coords` (one point per unknown) enables a geometric fill-reducing
  /// ordering; without it a graph-based one is used.
  void factorize(const SparseMatrix& a, const std::vector<Vec2>* coords = nullptr);
  Vector solve(const Vector& b) const;
  Vector solve_transpose(const Vector& b) const;

  /// ||A x - b||_inf / ||b||_inf of the last solve (0 if b = 0).
  double last_residual() const { return last_residual_; }
  bool factorized() const { return numeric_ != nullptr; }

 private:
  Vector run(const Vector& b, bool transpose) const;
  void release();

  SparseMatrix a_;
  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
  std::vector<long> pattern_outer_;  // index arrays handed to UMFPACK
  std::vector<long> pattern_inner_;
  mutable double last_residual_ = 0.0;
};

/// Factorize-and-solve convenience.
Vector solve_sparse(const SparseSystem& system, double* residual = nullptr);

/// Matrix Market coordinate export (1-based, general real).
void write_matrix_market(const std::string& path, const SparseMatrix& a);

}  // namespace vortishape::fem
