#include "hems/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hems::lp {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

// Column-compressed copy of the stacked rows [A; A_eq] over the original
// variables, inequality rows first. Duplicate entries are kept; every use
// sums over entries, so they contribute correctly.
struct Columns {
  int n = 0;
  std::vector<int> ptr;
  std::vector<int> row;
  std::vector<double> val;
};

Columns build_columns(const LpStandardForm& lp) {
  Columns cols;
  cols.n = lp.num_vars;
  std::vector<int> count(lp.num_vars, 0);
  auto tally = [&](const std::vector<SparseRow>& rows) {
    for (const SparseRow& r : rows)
      for (const auto& [j, v] : r.terms) {
        if (j < 0 || j >= lp.num_vars)
          throw std::invalid_argument("solve: constraint references column " +
                                      std::to_string(j) + " outside the variable range");
        if (v != 0.0) ++count[j];
      }
  };
  tally(lp.ineq);
  tally(lp.eq);

  cols.ptr.assign(lp.num_vars + 1, 0);
  for (int j = 0; j < lp.num_vars; ++j) cols.ptr[j + 1] = cols.ptr[j] + count[j];
  cols.row.resize(cols.ptr.back());
  cols.val.resize(cols.ptr.back());
  std::vector<int> fill(cols.ptr.begin(), cols.ptr.end() - 1);
  int row_id = 0;
  auto place = [&](const std::vector<SparseRow>& rows) {
    for (const SparseRow& r : rows) {
      for (const auto& [j, v] : r.terms) {
        if (v == 0.0) continue;
        cols.row[fill[j]] = row_id;
        cols.val[fill[j]] = v;
        ++fill[j];
      }
      ++row_id;
    }
  };
  place(lp.ineq);
  place(lp.eq);
  return cols;
}

class Simplex {
public:
  Simplex(const LpStandardForm& lp, const SolveOptions& opts) : lp_(lp), opts_(opts) {
    n_ = lp.num_vars;
    m1_ = static_cast<int>(lp.ineq.size());
    m2_ = static_cast<int>(lp.eq.size());
    m_ = m1_ + m2_;
    if (static_cast<int>(lp.objective.size()) != n_)
      throw std::invalid_argument("solve: objective length does not match num_vars");
    cols_ = build_columns(lp);

    // Flip rows so every right-hand side is nonnegative. A positive slack can
    // then seed the basis of an unflipped inequality row; flipped inequality
    // rows and all equality rows get an artificial instead.
    sigma_.assign(m_, 1.0);
    bhat_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double rhs = i < m1_ ? lp.ineq[i].rhs : lp.eq[i - m1_].rhs;
      if (rhs < 0.0) sigma_[i] = -1.0;
      bhat_[i] = sigma_[i] * rhs;
    }
    art_row_.clear();
    for (int i = 0; i < m_; ++i) {
      if (i < m1_ && sigma_[i] > 0.0) continue;
      art_row_.push_back(i);
    }
    n_art_ = static_cast<int>(art_row_.size());
    ncols_ = 2 * n_ + m1_ + n_art_;

    basis_.assign(m_, -1);
    in_basis_.assign(ncols_, 0);
    row_dependent_.assign(m_, 0);
    {
      int next_art = 0;
      for (int i = 0; i < m_; ++i) {
        int id;
        if (i < m1_ && sigma_[i] > 0.0) {
          id = slack_id(i);
        } else {
          id = art_id(next_art++);
        }
        basis_[i] = id;
        in_basis_[id] = 1;
      }
    }
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[idx(i, i)] = 1.0;
    xb_ = bhat_;

    max_iter_ = opts.max_iterations > 0 ? opts.max_iterations : 50 * (m_ + ncols_) + 200;
    bland_after_ = 10 * (m_ + ncols_);
  }

  SolveOutcome run() {
    SolveOutcome out;

    set_phase1_costs();
    LoopEnd end = iterate(true);
    if (end == LoopEnd::Limit) return limit_outcome();
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i)
      if (is_art(basis_[i])) infeas += std::max(xb_[i], 0.0);
    double bscale = 1.0;
    for (double b : bhat_) bscale = std::max(bscale, std::abs(b));
    if (infeas > opts_.feas_tol * bscale) {
      return infeasible_outcome();
    }

    drive_out_artificials();

    set_phase2_costs();
    for (int attempt = 0;; ++attempt) {
      end = iterate(false);
      if (end == LoopEnd::Limit) return limit_outcome();
      if (end == LoopEnd::Unbounded) return unbounded_outcome();
      // Clean recomputation; resume if round-off hid an improving column.
      refactor();
      compute_xb();
      if (attempt >= 3 || price() < 0) break;
    }
    return optimal_outcome();
  }

private:
  enum class LoopEnd { Done, Unbounded, Limit };

  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * m_ + j; }
  int slack_id(int i) const { return 2 * n_ + i; }
  int art_id(int k) const { return 2 * n_ + m1_ + k; }
  bool is_art(int id) const { return id >= 2 * n_ + m1_; }

  void set_phase1_costs() {
    cost_.assign(ncols_, 0.0);
    for (int k = 0; k < n_art_; ++k) cost_[art_id(k)] = 1.0;
  }
  void set_phase2_costs() {
    cost_.assign(ncols_, 0.0);
    for (int j = 0; j < n_; ++j) {
      cost_[j] = lp_.objective[j];
      cost_[n_ + j] = -lp_.objective[j];
    }
  }

  // Scaled column of the computational system: rows flipped by sigma.
  void scaled_column(int id, std::vector<std::pair<int, double>>& out) const {
    out.clear();
    if (id < 2 * n_) {
      const int j = id < n_ ? id : id - n_;
      const double s = id < n_ ? 1.0 : -1.0;
      for (int k = cols_.ptr[j]; k < cols_.ptr[j + 1]; ++k)
        out.push_back({cols_.row[k], s * sigma_[cols_.row[k]] * cols_.val[k]});
    } else if (id < 2 * n_ + m1_) {
      const int i = id - 2 * n_;
      out.push_back({i, sigma_[i]});
    } else {
      out.push_back({art_row_[id - 2 * n_ - m1_], 1.0});
    }
  }

  void compute_xb() {
    for (int i = 0; i < m_; ++i) {
      double s = 0.0;
      const double* row = &binv_[idx(i, 0)];
      for (int j = 0; j < m_; ++j) s += row[j] * bhat_[j];
      xb_[i] = s;
    }
  }

  // y' = c_B' B^-1 and its unflipped counterpart; then w_j = yhat'a_j over
  // original columns, so reduced costs read rc(x+_j) = c_j - w_j and
  // rc(x-_j) = w_j - c_j.
  void compute_duals() {
    y_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &binv_[idx(i, 0)];
      for (int j = 0; j < m_; ++j) y_[j] += cb * row[j];
    }
    yhat_.resize(m_);
    for (int i = 0; i < m_; ++i) yhat_[i] = sigma_[i] * y_[i];
    w_.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      double s = 0.0;
      for (int k = cols_.ptr[j]; k < cols_.ptr[j + 1]; ++k)
        s += yhat_[cols_.row[k]] * cols_.val[k];
      w_[j] = s;
    }
  }

  // Entering column id, or -1 when no reduced cost beats -opt_tol. Scans in
  // global id order so ties go to the lowest id; under Bland's rule the
  // first improving id wins outright.
  int price() {
    compute_duals();
    const double tol = opts_.opt_tol;
    int best_id = -1;
    double best_rc = -tol;
    auto consider = [&](int id, double rc) -> bool {
      if (rc < best_rc) {
        best_rc = rc;
        best_id = id;
        return true;
      }
      return false;
    };
    for (int j = 0; j < n_; ++j) {
      if (in_basis_[j] || in_basis_[n_ + j]) continue;
      if (consider(j, cost_[j] - w_[j]) && bland_) return best_id;
    }
    for (int j = 0; j < n_; ++j) {
      if (in_basis_[j] || in_basis_[n_ + j]) continue;
      if (consider(n_ + j, cost_[n_ + j] + w_[j]) && bland_) return best_id;
    }
    for (int i = 0; i < m1_; ++i) {
      const int id = slack_id(i);
      if (in_basis_[id]) continue;
      if (consider(id, -yhat_[i]) && bland_) return best_id;
    }
    return best_id;
  }

  // Leaving row for the entering direction d, or -1 when unbounded. Ties at
  // the minimum ratio prefer kicking artificials out, then the lowest basic
  // id (under Bland's rule, lowest id only).
  int ratio_test(const std::vector<double>& d) const {
    int leave = -1;
    double theta = std::numeric_limits<double>::infinity();
    int leave_bid = -1;
    bool leave_art = false;
    auto candidate = [&](int i, double ratio) {
      const int bid = basis_[i];
      const bool art = is_art(bid);
      const double eps = 1e-12 * (1.0 + std::abs(theta));
      bool take;
      if (leave < 0 || ratio < theta - eps) {
        take = true;
      } else if (ratio <= theta + eps) {
        if (bland_) take = bid < leave_bid;
        else take = (art && !leave_art) || (art == leave_art && bid < leave_bid);
      } else {
        take = false;
      }
      if (take) {
        leave = i;
        theta = std::min(theta, ratio);
        leave_bid = bid;
        leave_art = art;
      }
    };
    for (int i = 0; i < m_; ++i) {
      const double di = d[i];
      if (di > opts_.pivot_tol) {
        candidate(i, std::max(xb_[i], 0.0) / di);
      } else if (di < -opts_.pivot_tol && is_art(basis_[i]) && xb_[i] <= 1e-11) {
        // A zero-valued artificial would turn positive; block at a zero step.
        candidate(i, 0.0);
      }
    }
    return leave;
  }

  void pivot(int r, int entering, const std::vector<double>& d) {
    const double dr = d[r];
    if (std::abs(dr) < opts_.pivot_tol) throw SolverError("pivot element vanished");
    double* rowr = &binv_[idx(r, 0)];
    const double inv = 1.0 / dr;
    for (int j = 0; j < m_; ++j) rowr[j] *= inv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = d[i];
      if (f == 0.0) continue;
      double* rowi = &binv_[idx(i, 0)];
      for (int j = 0; j < m_; ++j) rowi[j] -= f * rowr[j];
    }
    in_basis_[basis_[r]] = 0;
    in_basis_[entering] = 1;
    basis_[r] = entering;
    if (++pivots_since_refactor_ >= opts_.refactor_interval) refactor();
  }

  void direction(int entering, std::vector<double>& d) {
    scaled_column(entering, colbuf_);
    d.assign(m_, 0.0);
    for (const auto& [r, v] : colbuf_) {
      for (int i = 0; i < m_; ++i) d[i] += binv_[idx(i, r)] * v;
    }
  }

  // Rebuilds B^-1 from the basis by Gauss-Jordan elimination with partial
  // pivoting. Guards against a numerically singular basis.
  void refactor() {
    std::vector<double> b(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      scaled_column(basis_[i], colbuf_);
      for (const auto& [r, v] : colbuf_) b[idx(r, i)] += v;
    }
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[idx(i, i)] = 1.0;
    for (int col = 0; col < m_; ++col) {
      int piv = col;
      double best = std::abs(b[idx(col, col)]);
      for (int i = col + 1; i < m_; ++i) {
        const double v = std::abs(b[idx(i, col)]);
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (best < 1e-12) throw SolverError("basis became singular during refactorization");
      if (piv != col) {
        for (int j = 0; j < m_; ++j) {
          std::swap(b[idx(piv, j)], b[idx(col, j)]);
          std::swap(inv[idx(piv, j)], inv[idx(col, j)]);
        }
      }
      const double p = 1.0 / b[idx(col, col)];
      for (int j = 0; j < m_; ++j) {
        b[idx(col, j)] *= p;
        inv[idx(col, j)] *= p;
      }
      for (int i = 0; i < m_; ++i) {
        if (i == col) continue;
        const double f = b[idx(i, col)];
        if (f == 0.0) continue;
        for (int j = 0; j < m_; ++j) {
          b[idx(i, j)] -= f * b[idx(col, j)];
          inv[idx(i, j)] -= f * inv[idx(col, j)];
        }
      }
    }
    binv_ = std::move(inv);
    pivots_since_refactor_ = 0;
  }

  LoopEnd iterate(bool phase1) {
    std::vector<double> d;
    for (;;) {
      if (iterations_ >= max_iter_) return LoopEnd::Limit;
      if (!bland_ && iterations_ >= bland_after_) bland_ = true;
      const int entering = price();
      if (entering < 0) return LoopEnd::Done;
      direction(entering, d);
      const int leave = ratio_test(d);
      if (leave < 0) {
        if (phase1) throw SolverError("phase 1 reported an unbounded direction");
        unbounded_entering_ = entering;
        unbounded_dir_ = d;
        return LoopEnd::Unbounded;
      }
      pivot(leave, entering, d);
      compute_xb();
      ++iterations_;
    }
  }

  // After a feasible phase 1, swap basic artificials for any usable column so
  // they cannot creep back above zero in phase 2. A row where no column has a
  // nonzero tableau entry is linearly dependent; its artificial stays basic
  // at zero and the ratio test keeps it there.
  void drive_out_artificials() {
    std::vector<double> d;
    for (int i = 0; i < m_; ++i) {
      if (!is_art(basis_[i])) continue;
      int best_id = -1;
      double best_mag = std::max(opts_.pivot_tol, 1e-9);
      for (int id = 0; id < 2 * n_ + m1_; ++id) {
        if (in_basis_[id]) continue;
        if (id < 2 * n_) {
          const int j = id < n_ ? id : id - n_;
          const int other = id < n_ ? n_ + j : j;
          if (in_basis_[other]) continue;
        }
        scaled_column(id, colbuf_);
        double alpha = 0.0;
        for (const auto& [r, v] : colbuf_) alpha += binv_[idx(i, r)] * v;
        if (std::abs(alpha) > best_mag) {
          best_mag = std::abs(alpha);
          best_id = id;
        }
      }
      if (best_id < 0) {
        row_dependent_[i] = 1;
        continue;
      }
      direction(best_id, d);
      pivot(i, best_id, d);
      compute_xb();
    }
  }

  SolveOutcome limit_outcome() const {
    SolveOutcome out;
    out.status = SolveStatus::IterationLimit;
    out.iterations = iterations_;
    return out;
  }

  SolveOutcome infeasible_outcome() {
    compute_duals();  // phase-1 multipliers certify the contradiction
    SolveOutcome out;
    out.status = SolveStatus::Infeasible;
    out.iterations = iterations_;
    FarkasCertificate cert;
    cert.ineq_mult.resize(m1_);
    cert.eq_mult.resize(m2_);
    for (int i = 0; i < m1_; ++i) cert.ineq_mult[i] = std::max(0.0, -yhat_[i]);
    for (int i = 0; i < m2_; ++i) cert.eq_mult[i] = -yhat_[m1_ + i];
    double gap = 0.0;
    for (int i = 0; i < m1_; ++i) gap += cert.ineq_mult[i] * lp_.ineq[i].rhs;
    for (int i = 0; i < m2_; ++i) gap += cert.eq_mult[i] * lp_.eq[i].rhs;
    cert.gap = gap;
    double peak = 0.0;
    for (double v : cert.ineq_mult) peak = std::max(peak, v);
    for (int i = 0; i < m1_; ++i)
      if (cert.ineq_mult[i] > 1e-9 * (1.0 + peak)) cert.active_rows.push_back(i);
    out.farkas = std::move(cert);
    return out;
  }

  SolveOutcome unbounded_outcome() const {
    SolveOutcome out;
    out.status = SolveStatus::Unbounded;
    out.iterations = iterations_;
    out.objective = -std::numeric_limits<double>::infinity();
    std::vector<double> ray(n_, 0.0);
    const int e = unbounded_entering_;
    if (e < n_) ray[e] += 1.0;
    else if (e < 2 * n_) ray[e - n_] -= 1.0;
    for (int i = 0; i < m_; ++i) {
      const int bid = basis_[i];
      if (bid < n_) ray[bid] -= unbounded_dir_[i];
      else if (bid < 2 * n_) ray[bid - n_] += unbounded_dir_[i];
    }
    out.ray = std::move(ray);
    return out;
  }

  SolveOutcome optimal_outcome() {
    compute_duals();
    SolveOutcome out;
    out.status = SolveStatus::Optimal;
    out.iterations = iterations_;
    out.x.assign(n_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const int bid = basis_[i];
      if (bid < n_) out.x[bid] += xb_[i];
      else if (bid < 2 * n_) out.x[bid - n_] -= xb_[i];
    }
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += lp_.objective[j] * out.x[j];
    out.objective = obj;
    out.dual_ineq.resize(m1_);
    for (int i = 0; i < m1_; ++i) out.dual_ineq[i] = std::max(0.0, -yhat_[i]);
    out.dual_eq.resize(m2_);
    for (int i = 0; i < m2_; ++i) out.dual_eq[i] = -yhat_[m1_ + i];

    // A termination sanity check: the reported point must satisfy the
    // original rows. Violations here mean the arithmetic went wrong, not
    // that the model is infeasible.
    double rscale = 1.0;
    double viol = 0.0;
    for (int i = 0; i < m1_; ++i) {
      double lhs = 0.0;
      for (const auto& [j, v] : lp_.ineq[i].terms) lhs += v * out.x[j];
      viol = std::max(viol, lhs - lp_.ineq[i].rhs);
      rscale = std::max(rscale, std::abs(lp_.ineq[i].rhs));
    }
    for (int i = 0; i < m2_; ++i) {
      double lhs = 0.0;
      for (const auto& [j, v] : lp_.eq[i].terms) lhs += v * out.x[j];
      viol = std::max(viol, std::abs(lhs - lp_.eq[i].rhs));
      rscale = std::max(rscale, std::abs(lp_.eq[i].rhs));
    }
    if (viol > 1e-6 * rscale)
      throw SolverError("terminated with primal residual " + std::to_string(viol));
    return out;
  }

  const LpStandardForm& lp_;
  SolveOptions opts_;
  int n_ = 0, m1_ = 0, m2_ = 0, m_ = 0, n_art_ = 0, ncols_ = 0;
  std::vector<double> sigma_, bhat_;
  Columns cols_;
  std::vector<int> art_row_;
  std::vector<int> basis_;
  std::vector<char> in_basis_, row_dependent_;
  std::vector<double> binv_, xb_, y_, yhat_, w_, cost_;
  std::vector<std::pair<int, double>> colbuf_;
  int iterations_ = 0, max_iter_ = 0, bland_after_ = 0, pivots_since_refactor_ = 0;
  bool bland_ = false;
  int unbounded_entering_ = -1;
  std::vector<double> unbounded_dir_;
};

void equilibrate_rows(LpStandardForm& lp, std::vector<double>& r_ineq,
                      std::vector<double>& r_eq) {
  auto scale_rows = [](std::vector<SparseRow>& rows, std::vector<double>& factors) {
    factors.assign(rows.size(), 1.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double peak = 0.0;
      for (const auto& [j, v] : rows[i].terms) peak = std::max(peak, std::abs(v));
      if (peak <= 0.0) continue;
      const double f = 1.0 / peak;
      factors[i] = f;
      for (auto& [j, v] : rows[i].terms) v *= f;
      rows[i].rhs *= f;
    }
  };
  scale_rows(lp.ineq, r_ineq);
  scale_rows(lp.eq, r_eq);
}

} // namespace

SolveOutcome solve(const LpStandardForm& lp, const SolveOptions& opts) {
  if (!opts.equilibrate) return Simplex(lp, opts).run();

  LpStandardForm scaled = lp;
  std::vector<double> r_ineq, r_eq;
  equilibrate_rows(scaled, r_ineq, r_eq);
  SolveOptions inner = opts;
  inner.equilibrate = false;
  SolveOutcome out = Simplex(scaled, inner).run();

  // A row scaled by f carries a multiplier f*lambda relative to the original.
  for (std::size_t i = 0; i < out.dual_ineq.size(); ++i) out.dual_ineq[i] *= r_ineq[i];
  for (std::size_t i = 0; i < out.dual_eq.size(); ++i) out.dual_eq[i] *= r_eq[i];
  if (out.farkas) {
    for (std::size_t i = 0; i < out.farkas->ineq_mult.size(); ++i)
      out.farkas->ineq_mult[i] *= r_ineq[i];
    for (std::size_t i = 0; i < out.farkas->eq_mult.size(); ++i)
      out.farkas->eq_mult[i] *= r_eq[i];
    double gap = 0.0;
    for (std::size_t i = 0; i < out.farkas->ineq_mult.size(); ++i)
      gap += out.farkas->ineq_mult[i] * lp.ineq[i].rhs;
    for (std::size_t i = 0; i < out.farkas->eq_mult.size(); ++i)
      gap += out.farkas->eq_mult[i] * lp.eq[i].rhs;
    out.farkas->gap = gap;
  }
  return out;
}

double dual_by_constraint(const SolveOutcome& outcome, const ConstraintIndex& index,
                          ConstraintKind kind, int t) {
  const int row = index.row(kind, t);
  if (kind == ConstraintKind::Balance) {
    if (row >= static_cast<int>(outcome.dual_eq.size()))
      throw std::out_of_range("dual_by_constraint: outcome has no equality duals");
    return outcome.dual_eq[row];
  }
  if (row >= static_cast<int>(outcome.dual_ineq.size()))
    throw std::out_of_range("dual_by_constraint: outcome has no inequality duals");
  return outcome.dual_ineq[row];
}

} // namespace hems::lp
