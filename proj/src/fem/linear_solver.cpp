#include "vortishape/fem/linear_solver.hpp"

#include <umfpack.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <vector>
#include <algorithm>

namespace vortishape::fem {

// UMFPACK sees the CSR arrays of A as the CSC arrays of A^T, so a solve with
// A uses UMFPACK_At and a solve with A^T uses UMFPACK_A.

namespace {

// Nested dissection on the graph of A + A^T. With unknown coordinates each
// block is halved at the coordinate median along its longer side and the
// separator is the set of left nodes coupled to the right half; without
// them breadth-first level sets are used. Blocks are emitted in ascending
// index order, so velocity unknowns precede the pressure unknowns they
// couple to and the symmetric strategy finds nonzero diagonal pivots.
class Dissection {
 public:
  Dissection(long n, const std::vector<long>& ap, const std::vector<long>& ai, const std::vector<Vec2>* xy)
      : xy_(xy), adj_(n), owner_(n, -1), level_(n, -1) {
    for (long r = 0; r < n; ++r)
      for (long k = ap[r]; k < ap[r + 1]; ++k)
        if (ai[k] != r) {
          adj_[r].push_back(ai[k]);
          adj_[ai[k]].push_back(r);
        }
    for (auto& a : adj_) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    std::vector<long> all(n);
    for (long i = 0; i < n; ++i) all[i] = i;
    split(std::move(all));
  }
  std::vector<long> order;

 private:
  static constexpr size_t kLeaf = 64;

  void split(std::vector<long> ids) {
    if (ids.size() <= kLeaf) {
      emit(std::move(ids));
      return;
    }
    std::vector<long> left, right, sep;
    if (xy_ ? !bisect(ids, left, right, sep) : !level_split(ids, left, right, sep)) {
      emit(std::move(ids));
      return;
    }
    split(std::move(left));
    split(std::move(right));
    emit(std::move(sep));
  }

  bool bisect(std::vector<long>& ids, std::vector<long>& left, std::vector<long>& right, std::vector<long>& sep) {
    const auto& xy = *xy_;
    Vec2 lo = xy[ids[0]], hi = lo;
    for (long i : ids) {
      lo = lo.cwiseMin(xy[i]);
      hi = hi.cwiseMax(xy[i]);
    }
    const int ax = (hi.x() - lo.x()) >= (hi.y() - lo.y()) ? 0 : 1;
    const size_t mid = ids.size() / 2;
    std::nth_element(ids.begin(), ids.begin() + mid, ids.end(), [&](long a, long b) {
      return xy[a][ax] < xy[b][ax] || (xy[a][ax] == xy[b][ax] && a < b);
    });
    const long tag = ++tag_;
    for (size_t k = mid; k < ids.size(); ++k) owner_[ids[k]] = tag;
    for (size_t k = 0; k < mid; ++k) {
      bool cut = false;
      for (long w : adj_[ids[k]])
        if (owner_[w] == tag) {
          cut = true;
          break;
        }
      (cut ? sep : left).push_back(ids[k]);
    }
    right.assign(ids.begin() + mid, ids.end());
    return !left.empty() || !sep.empty();
  }

  // levels of a BFS from `root` restricted to nodes owned by `tag`
  std::vector<long> bfs(long root, long tag, int* depth) {
    std::vector<long> seen{root};
    level_[root] = 0;
    for (size_t head = 0; head < seen.size(); ++head)
      for (long w : adj_[seen[head]])
        if (owner_[w] == tag && level_[w] < 0) {
          level_[w] = level_[seen[head]] + 1;
          seen.push_back(w);
        }
    *depth = level_[seen.back()];
    return seen;
  }

  bool level_split(const std::vector<long>& ids, std::vector<long>& left, std::vector<long>& right,
                   std::vector<long>& sep) {
    const long tag = ++tag_;
    for (long i : ids) owner_[i] = tag;
    // pseudo-peripheral start: two sweeps from the first node
    int depth = 0;
    std::vector<long> seen = bfs(ids.front(), tag, &depth);
    const long far = seen.back();
    for (long i : seen) level_[i] = -1;
    seen = bfs(far, tag, &depth);
    if (seen.size() < ids.size()) {
      // disconnected: this component against the rest, no separator
      for (long i : seen) {
        level_[i] = -1;
        owner_[i] = -2;
      }
      for (long i : ids) (owner_[i] == -2 ? left : right).push_back(i);
      return true;
    }
    std::vector<size_t> count(depth + 1, 0);
    for (long i : seen) ++count[level_[i]];
    int cut = 0;
    for (size_t acc = 0; cut <= depth; ++cut) {
      acc += count[cut];
      if (2 * acc >= ids.size()) break;
    }
    const bool ok = cut > 0 && cut < depth;
    if (ok)
      for (long i : seen) (level_[i] < cut ? left : level_[i] > cut ? right : sep).push_back(i);
    for (long i : seen) level_[i] = -1;
    return ok;
  }

  void emit(std::vector<long> ids) {
    std::sort(ids.begin(), ids.end());
    order.insert(order.end(), ids.begin(), ids.end());
  }

  const std::vector<Vec2>* xy_;
  std::vector<std::vector<long>> adj_;
  std::vector<long> owner_;
  std::vector<int> level_;
  long tag_ = 0;
};

}  // namespace

DirectSolver::DirectSolver() = default;

DirectSolver::~DirectSolver() { release(); }

void DirectSolver::release() {
  if (numeric_) umfpack_dl_free_numeric(&numeric_);
  if (symbolic_) umfpack_dl_free_symbolic(&symbolic_);
  numeric_ = nullptr;
  symbolic_ = nullptr;
}

void DirectSolver::factorize(const SparseMatrix& a, const std::vector<Vec2>* coords) {
  if (coords && static_cast<long>(coords->size()) != a.rows())
    throw std::invalid_argument("one coordinate per unknown required");
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix is not square");
  if (a.rows() == 0) throw std::invalid_argument("empty matrix");
  // Explicit zeros (eliminated Dirichlet couplings) only add fill.
  a_ = a.pruned(0.0, 0.0);
  a_.makeCompressed();
  const long n = a_.rows();
  const long nnz = a_.nonZeros();
  // 64-bit indices: the 32-bit interface runs out of workspace on fine meshes
  std::vector<long> ap(a_.outerIndexPtr(), a_.outerIndexPtr() + n + 1);
  std::vector<long> ai(a_.innerIndexPtr(), a_.innerIndexPtr() + nnz);
  const double* ax = a_.valuePtr();

  const bool same_pattern = symbolic_ && ap == pattern_outer_ && ai == pattern_inner_;
  if (numeric_) umfpack_dl_free_numeric(&numeric_);
  numeric_ = nullptr;

  // Saddle point systems with the default unsymmetric strategy fill in
  // badly on fine meshes; a dissection ordering with diagonal pivoting keeps
  // the factors near O(n log n).
  double control[UMFPACK_CONTROL];
  umfpack_dl_defaults(control);
  control[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
  // the symbolic size estimate is a loose upper bound; starting from it
  // makes large factorizations thrash, so start small and let it grow
  control[UMFPACK_ALLOC_INIT] = -8.0 * static_cast<double>(nnz);
  double info[UMFPACK_INFO];
  if (!same_pattern) {
    if (symbolic_) umfpack_dl_free_symbolic(&symbolic_);
    symbolic_ = nullptr;
    const std::vector<long> q = Dissection(n, ap, ai, coords).order;
    const long status = umfpack_dl_qsymbolic(n, n, ap.data(), ai.data(), ax, q.data(), &symbolic_, control, info);
    if (status != UMFPACK_OK) {
      release();
      throw SingularMatrixError("sparse symbolic analysis failed (status " + std::to_string(status) + ")", -1);
    }
    pattern_outer_ = std::move(ap);
    pattern_inner_ = std::move(ai);
  }
  const long status = umfpack_dl_numeric(pattern_outer_.data(), pattern_inner_.data(), ax, symbolic_, &numeric_, control, info);
  if (status == UMFPACK_WARNING_singular_matrix) {
    std::vector<long> p(n), q(n);
    std::vector<double> udiag(n);
    long pivot = -1;
    if (umfpack_dl_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, p.data(), q.data(),
                               udiag.data(), nullptr, nullptr, numeric_) == UMFPACK_OK) {
      for (int k = 0; k < n; ++k)
        if (udiag[k] == 0.0) {
          pivot = q[k];
          break;
        }
    }
    umfpack_dl_free_numeric(&numeric_);
    numeric_ = nullptr;
    throw SingularMatrixError("singular matrix: zero pivot at unknown " + std::to_string(pivot), static_cast<int>(pivot));
  }
  if (status != UMFPACK_OK) {
    if (numeric_) umfpack_dl_free_numeric(&numeric_);
    numeric_ = nullptr;
    throw SingularMatrixError("sparse factorization failed (status " + std::to_string(status) + ")", -1);
  }
}

Vector DirectSolver::run(const Vector& b, bool transpose) const {
  if (!numeric_) throw std::logic_error("solve before factorize");
  if (b.size() != a_.rows()) throw std::invalid_argument("right-hand side length does not match matrix");
  Vector x(b.size());
  double control[UMFPACK_CONTROL];
  umfpack_dl_defaults(control);
  double info[UMFPACK_INFO];
  const int sys = transpose ? UMFPACK_A : UMFPACK_At;
  const long status = umfpack_dl_solve(sys, pattern_outer_.data(), pattern_inner_.data(), a_.valuePtr(), x.data(), b.data(),
                                      numeric_, control, info);
  if (status != UMFPACK_OK) throw SingularMatrixError("sparse solve failed (status " + std::to_string(status) + ")", -1);
  const double bn = b.lpNorm<Eigen::Infinity>();
  const Vector r = transpose ? Vector(a_.transpose() * x - b) : Vector(a_ * x - b);
  last_residual_ = bn > 0.0 ? r.lpNorm<Eigen::Infinity>() / bn : r.lpNorm<Eigen::Infinity>();
  return x;
}

Vector DirectSolver::solve(const Vector& b) const { return run(b, false); }
Vector DirectSolver::solve_transpose(const Vector& b) const { return run(b, true); }

Vector solve_sparse(const SparseSystem& system, double* residual) {
  if (system.matrix.rows() != system.rhs.size()) throw std::invalid_argument("system dimension mismatch");
  DirectSolver s;
  s.factorize(system.matrix);
  Vector x = s.solve(system.rhs);
  if (residual) *residual = s.last_residual();
  return x;
}

void write_matrix_market(const std::string& path, const SparseMatrix& a) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "%%MatrixMarket matrix coordinate real general\n";
  f << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  f << std::setprecision(17);
  for (int r = 0; r < a.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) f << r + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace vortishape::fem
