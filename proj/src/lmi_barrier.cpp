#include "aifdom/lmi_barrier.hpp"

#include "aifdom/errors.hpp"

#include <cmath>
#include <limits>

namespace aifdom {

namespace {

Matrix assemble(const LmiBlock& b, const Vector& x) {
  Matrix f = b.f0;
  for (std::size_t k = 0; k < b.fk.size(); ++k) f += x[static_cast<Eigen::Index>(k)] * b.fk[k];
  return f;
}

// -sum log det F_i(x), or +inf outside the feasible interior.
double barrier_value(const std::vector<LmiBlock>& blocks, const Vector& x) {
  double v = 0.0;
  for (const auto& b : blocks) {
    Eigen::LLT<Matrix> llt(assemble(b, x));
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const auto& l = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < b.f0.rows(); ++i) {
      const double d = l(i, i);
      if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
      logdet += 2.0 * std::log(d);
    }
    v -= logdet;
  }
  return v;
}

}  // namespace

double lmi_min_eigenvalue(const std::vector<LmiBlock>& blocks, const Vector& x) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(assemble(b, x), Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues()[0]);
  }
  return m;
}

BarrierResult maximize_lmi(const Vector& cost, const std::vector<LmiBlock>& blocks,
                           const Vector& x0, const BarrierOptions& opts) {
  const Eigen::Index nv = cost.size();
  double total_dim = 0.0;
  for (const auto& b : blocks) {
    if (static_cast<Eigen::Index>(b.fk.size()) != nv) {
      throw DomainError("LMI block has the wrong number of coefficient matrices");
    }
    total_dim += static_cast<double>(b.f0.rows());
  }
  if (!std::isfinite(barrier_value(blocks, x0))) {
    throw DomainError("barrier start point is not strictly feasible");
  }

  BarrierResult res;
  Vector x = x0;
  double weight = opts.initial_weight;

  auto phi = [&](const Vector& y) { return -weight * cost.dot(y) + barrier_value(blocks, y); };

  double prev_objective = -std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    // Centering.
    bool centered = false;
    for (int it = 0; it < opts.max_newton_per_center; ++it) {
      Vector grad = -weight * cost;
      Matrix hess = Matrix::Zero(nv, nv);
      std::vector<Matrix> sf(static_cast<std::size_t>(nv));
      for (const auto& b : blocks) {
        const Matrix f = assemble(b, x);
        Eigen::LLT<Matrix> llt(f);
        const Matrix s = llt.solve(Matrix::Identity(f.rows(), f.cols()));
        for (Eigen::Index k = 0; k < nv; ++k) {
          sf[static_cast<std::size_t>(k)].noalias() = s * b.fk[static_cast<std::size_t>(k)];
          grad[k] -= sf[static_cast<std::size_t>(k)].trace();
        }
        for (Eigen::Index k = 0; k < nv; ++k) {
          const Matrix& mk = sf[static_cast<std::size_t>(k)];
          for (Eigen::Index l = k; l < nv; ++l) {
            const double v = mk.cwiseProduct(sf[static_cast<std::size_t>(l)].transpose()).sum();
            hess(k, l) += v;
            if (l != k) hess(l, k) += v;
          }
        }
      }
      // Diagonal scaling keeps the solve usable when the blocks are nearly singular.
      const Vector d = hess.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
      const Matrix hs = d.asDiagonal() * hess * d.asDiagonal();
      Eigen::LDLT<Matrix> ldlt(hs);
      if (ldlt.info() != Eigen::Success) break;
      const Vector dx = -(d.asDiagonal() * ldlt.solve(d.asDiagonal() * grad)).eval();
      const double decrement2 = -grad.dot(dx);
      ++res.newton_steps;
      if (!std::isfinite(decrement2) || decrement2 < 0.0) break;
      if (decrement2 / 2.0 <= 1e-10) {
        centered = true;
        break;
      }

      const double f0 = phi(x);
      double step = 1.0;
      bool moved = false;
      while (step > 1e-14) {
        const Vector cand = x + step * dx;
        const double fc = phi(cand);
        if (std::isfinite(fc) && fc <= f0 - 0.25 * step * decrement2) {
          x = cand;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) {
        centered = decrement2 / 2.0 <= 1e-6;
        break;
      }
    }

    res.x = x;
    res.objective = cost.dot(x);
    res.upper_bound = res.objective + total_dim / weight;
    if (total_dim / weight <= opts.gap_tol * (1.0 + std::abs(res.objective))) {
      res.converged = true;
      return res;
    }
    // Numerical stall: no progress and no centring at this weight.
    if (!centered && outer > 0 && res.objective == prev_objective) return res;
    // The bound is only trustworthy from a centred point.
    if (centered && opts.give_up_below && res.upper_bound < *opts.give_up_below) return res;
    prev_objective = res.objective;
    weight *= opts.weight_growth;
  }
  return res;
}

}  // namespace aifdom
