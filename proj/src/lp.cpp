#include "groupbound/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "groupbound/errors.hpp"

namespace groupbound::lp {

namespace {

constexpr double kPivotTol = 1e-11;

void validate(const Problem& pb) {
  const Eigen::Index d = pb.c.size();
  const Eigen::Index r = pb.beq.size();
  if (d < 1) throw DimensionMismatch("lp: empty objective");
  if (pb.Aeq.rows() != r) {
    throw DimensionMismatch("lp: Aeq has " + std::to_string(pb.Aeq.rows()) +
                            " rows but beq has " + std::to_string(r));
  }
  if (r > 0 && pb.Aeq.cols() != d) {
    throw DimensionMismatch("lp: Aeq has " + std::to_string(pb.Aeq.cols()) +
                            " columns but objective has " + std::to_string(d));
  }
  if (pb.lower.size() != 0 && pb.lower.size() != d) {
    throw DimensionMismatch("lp: lower bound length mismatch");
  }
  if (pb.upper.size() != 0 && pb.upper.size() != d) {
    throw DimensionMismatch("lp: upper bound length mismatch");
  }
  if (!pb.c.allFinite() || (r > 0 && !pb.Aeq.allFinite()) ||
      !pb.beq.allFinite()) {
    throw DimensionMismatch("lp: non-finite entries in problem data");
  }
  if (pb.lower.size() != 0 && !pb.lower.allFinite()) {
    throw DimensionMismatch("lp: non-finite lower bound");
  }
}

struct Tableau {
  // rows 0..R-1 hold [A | rhs]; row R holds reduced costs and -objective.
  Eigen::MatrixXd t;
  std::vector<int> basis;  // basis[i] = column basic in row i
  int rows = 0;
  int cols = 0;  // structural + artificial columns (rhs excluded)

  double& rhs(int i) { return t(i, cols); }

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int i = 0; i <= rows; ++i) {
      if (i == row) continue;
      const double f = t(i, col);
      if (f != 0.0) t.row(i) -= f * t.row(row);
    }
    basis[static_cast<std::size_t>(row)] = col;
  }
};

enum class IterResult { Optimal, Unbounded };

// Bland's rule: entering = lowest-index improving column, leaving = minimum
// ratio with ties broken by lowest basic variable index.
IterResult iterate(Tableau& tb, int active_cols, double opt_tol, int cap,
                   int& iters) {
  while (true) {
    int enter = -1;
    for (int j = 0; j < active_cols; ++j) {
      if (tb.t(tb.rows, j) < -opt_tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return IterResult::Optimal;

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < tb.rows; ++i) {
      const double a = tb.t(i, enter);
      if (a > kPivotTol) {
        const double ratio = tb.rhs(i) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && leave >= 0 &&
             tb.basis[static_cast<std::size_t>(i)] <
                 tb.basis[static_cast<std::size_t>(leave)])) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return IterResult::Unbounded;

    tb.pivot(leave, enter);
    if (++iters > cap) {
      throw NumericalFailure("lp: iteration cap exhausted (" +
                             std::to_string(cap) + ")");
    }
  }
}

}  // namespace

Solution solve(const Problem& pb, const Options& opt) {
  validate(pb);
  const int d = static_cast<int>(pb.c.size());
  const int r = static_cast<int>(pb.beq.size());

  const Eigen::VectorXd lower =
      pb.lower.size() == 0 ? Eigen::VectorXd::Zero(d) : pb.lower;

  // Shifted variables u = x - lower, upper bounds as extra slack rows.
  std::vector<int> ub_var;
  std::vector<double> ub_gap;
  if (pb.upper.size() != 0) {
    for (int j = 0; j < d; ++j) {
      const double u = pb.upper(j);
      if (std::isfinite(u)) {
        if (u < lower(j)) return {Status::Infeasible, 0.0, {}, 0};
        ub_var.push_back(j);
        ub_gap.push_back(u - lower(j));
      }
    }
  }
  const int n_ub = static_cast<int>(ub_var.size());
  const int rows = r + n_ub;       // constraint rows in standard form
  const int n_struct = d + n_ub;   // shifted vars + upper-bound slacks
  const int n_total = n_struct + rows;  // + artificials

  Tableau tb;
  tb.rows = rows;
  tb.cols = n_total;
  tb.t = Eigen::MatrixXd::Zero(rows + 1, n_total + 1);
  tb.basis.assign(static_cast<std::size_t>(rows), -1);

  if (r > 0) {
    tb.t.block(0, 0, r, d) = pb.Aeq;
    tb.t.block(0, n_total, r, 1) = pb.beq - pb.Aeq * lower;
  }
  for (int k = 0; k < n_ub; ++k) {
    tb.t(r + k, ub_var[static_cast<std::size_t>(k)]) = 1.0;
    tb.t(r + k, d + k) = 1.0;
    tb.rhs(r + k) = ub_gap[static_cast<std::size_t>(k)];
  }
  for (int i = 0; i < rows; ++i) {
    if (tb.rhs(i) < 0.0) tb.t.row(i) = -tb.t.row(i);
    tb.t(i, n_struct + i) = 1.0;
    tb.basis[static_cast<std::size_t>(i)] = n_struct + i;
  }

  const int cap = opt.max_iter_factor * (n_total + rows + 1);
  int iters = 0;

  // Phase 1: minimize the sum of artificials. Artificials are barred from
  // re-entering, so only structural columns are candidates.
  for (int i = 0; i < rows; ++i) tb.t.row(rows) -= tb.t.row(i);
  tb.t.block(rows, n_struct, 1, rows).setZero();
  iterate(tb, n_struct, opt.opt_tol, cap, iters);  // bounded below by zero

  const double beq_scale = r > 0 ? 1.0 + pb.beq.cwiseAbs().maxCoeff() : 1.0;
  if (-tb.rhs(rows) > opt.feas_tol * beq_scale) {
    return {Status::Infeasible, std::numeric_limits<double>::quiet_NaN(), {},
            iters};
  }

  // Drive any artificial still basic out of the basis; an all-zero row is a
  // redundant constraint and is deactivated in place.
  std::vector<bool> active_row(static_cast<std::size_t>(rows), true);
  for (int i = 0; i < rows; ++i) {
    if (tb.basis[static_cast<std::size_t>(i)] < n_struct) continue;
    int piv = -1;
    for (int j = 0; j < n_struct; ++j) {
      if (std::abs(tb.t(i, j)) > kPivotTol) {
        piv = j;
        break;
      }
    }
    if (piv >= 0) {
      tb.pivot(i, piv);
    } else {
      active_row[static_cast<std::size_t>(i)] = false;
    }
  }
  if (!std::all_of(active_row.begin(), active_row.end(),
                   [](bool b) { return b; })) {
    // Compact the tableau to active rows only.
    int keep = 0;
    std::vector<int> new_basis;
    for (int i = 0; i < rows; ++i) {
      if (!active_row[static_cast<std::size_t>(i)]) continue;
      tb.t.row(keep) = tb.t.row(i);
      new_basis.push_back(tb.basis[static_cast<std::size_t>(i)]);
      ++keep;
    }
    tb.t.row(keep) = tb.t.row(rows);
    tb.t.conservativeResize(keep + 1, Eigen::NoChange);
    tb.rows = keep;
    tb.basis = std::move(new_basis);
  }

  // Phase 2: original objective over structural columns, artificials barred.
  tb.t.row(tb.rows).setZero();
  tb.t.block(tb.rows, 0, 1, d) = pb.c.transpose();
  for (int i = 0; i < tb.rows; ++i) {
    const int b = tb.basis[static_cast<std::size_t>(i)];
    if (b < d && pb.c(b) != 0.0) {
      tb.t.row(tb.rows) -= pb.c(b) * tb.t.row(i);
    }
  }
  const IterResult res = iterate(tb, n_struct, opt.opt_tol, cap, iters);
  if (res == IterResult::Unbounded) {
    return {Status::Unbounded, -std::numeric_limits<double>::infinity(), {},
            iters};
  }

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n_struct);
  for (int i = 0; i < tb.rows; ++i) {
    const int b = tb.basis[static_cast<std::size_t>(i)];
    if (b < n_struct) u(b) = std::max(0.0, tb.rhs(i));
  }
  Solution out;
  out.status = Status::Optimal;
  out.x = lower + u.head(d);
  out.value = pb.c.dot(out.x);
  out.iterations = iters;
  return out;
}

}  // namespace groupbound::lp
