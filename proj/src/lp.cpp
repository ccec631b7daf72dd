#include "esbilr/lp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace esbilr {

int LinearProgram::add_var(double lo_, double up_, double obj_, std::string name) {
    lo.push_back(lo_);
    up.push_back(up_);
    obj.push_back(obj_);
    col_name.push_back(std::move(name));
    return n_vars() - 1;
}

int LinearProgram::add_row(Sense s, double rhs_, std::vector<std::pair<int, double>> coefs,
                           std::string name) {
    rows.push_back(std::move(coefs));
    sense.push_back(s);
    rhs.push_back(rhs_);
    row_name.push_back(std::move(name));
    return n_rows() - 1;
}

double LinearProgram::activity(int row, const std::vector<double>& x) const {
    double a = 0.0;
    for (auto [j, c] : rows[row]) a += c * x[j];
    return a;
}

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kOptTol = 1e-9;
constexpr double kPivotTol = 1e-10;
constexpr int kRefactorEvery = 80;

constexpr int32_t kAtLower = -1;
constexpr int32_t kAtUpper = -2;
constexpr int32_t kFree = -3;

struct EtaStep {
    int pivot_row;
    double pivot_val;
    std::vector<std::pair<int, double>> lmult; // (row, multiplier)
    std::vector<std::pair<int, double>> ucol;  // (earlier step, value)
};

struct UpdateEta {
    int pos;
    double pivot;
    std::vector<std::pair<int, double>> col; // FTRAN'd entering column over positions
};

class Simplex {
public:
    explicit Simplex(const LinearProgram& lp) : lp_(lp), m_(lp.n_rows()), n_(lp.n_vars()) {
        total_ = n_ + m_;
        build_columns();
    }

    LpResult run(const Basis* warm);

private:
    const LinearProgram& lp_;
    int m_, n_, total_;

    std::vector<std::vector<std::pair<int, double>>> cols_; // incl. slack columns
    std::vector<double> clo_, cup_;

    std::vector<int32_t> state_;
    std::vector<int> basic_;
    std::vector<double> xval_;

    std::vector<EtaStep> lu_;
    std::vector<UpdateEta> etas_;
    std::vector<double> work_;

    int iterations_ = 0;
    bool bland_ = false;
    int degenerate_run_ = 0;

    void build_columns() {
        cols_.assign(total_, {});
        clo_.assign(total_, 0.0);
        cup_.assign(total_, 0.0);
        for (int j = 0; j < n_; ++j) {
            clo_[j] = lp_.lo[j];
            cup_[j] = lp_.up[j];
        }
        for (int r = 0; r < m_; ++r) {
            for (auto [j, c] : lp_.rows[r])
                if (c != 0.0) cols_[j].push_back({r, c});
            int s = n_ + r;
            cols_[s] = {{r, 1.0}};
            switch (lp_.sense[r]) {
                case Sense::LE: clo_[s] = 0.0; cup_[s] = kInf; break;
                case Sense::GE: clo_[s] = -kInf; cup_[s] = 0.0; break;
                case Sense::EQ: clo_[s] = 0.0; cup_[s] = 0.0; break;
            }
        }
    }

    int32_t offbasis_state(int j) const {
        if (clo_[j] == -kInf && cup_[j] == kInf) return kFree;
        if (clo_[j] == -kInf) return kAtUpper;
        return kAtLower;
    }

    double nonbasic_value(int j) const {
        switch (state_[j]) {
            case kAtLower: return clo_[j];
            case kAtUpper: return cup_[j];
            default: return 0.0;
        }
    }

    void default_basis() {
        state_.assign(total_, 0);
        for (int j = 0; j < total_; ++j) state_[j] = offbasis_state(j);
        basic_.resize(m_);
        for (int r = 0; r < m_; ++r) {
            basic_[r] = n_ + r;
            state_[n_ + r] = r;
        }
    }

    bool load_basis(const Basis& b) {
        if (static_cast<int>(b.state.size()) != total_) return false;
        state_ = b.state;
        basic_.assign(m_, -1);
        for (int j = 0; j < total_; ++j) {
            int32_t s = state_[j];
            if (s >= 0) {
                if (s >= m_ || basic_[s] != -1) return false;
                basic_[s] = j;
            } else if (s == kAtLower && clo_[j] == -kInf) {
                state_[j] = offbasis_state(j);
            } else if (s == kAtUpper && cup_[j] == kInf) {
                state_[j] = offbasis_state(j);
            }
        }
        for (int r = 0; r < m_; ++r)
            if (basic_[r] == -1) return false;
        return true;
    }

    void refactor() {
        lu_.clear();
        lu_.reserve(m_);
        etas_.clear();
        std::vector<char> pivoted(m_, 0);
        std::vector<int> rowstep(m_, -1);
        work_.assign(m_, 0.0);
        std::vector<int> touched;

        for (int pos = 0; pos < m_; ++pos) {
            int col = basic_[pos];
            touched.clear();
            for (auto [r, v] : cols_[col]) {
                work_[r] = v;
                touched.push_back(r);
            }
            for (const auto& s : lu_) {
                double t = work_[s.pivot_row];
                if (t == 0.0) continue;
                for (auto [r, mu] : s.lmult) {
                    if (work_[r] == 0.0) touched.push_back(r);
                    work_[r] -= mu * t;
                }
            }
            std::sort(touched.begin(), touched.end());
            touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

            int prow = -1;
            double pmax = kPivotTol;
            for (int r : touched) {
                if (pivoted[r]) continue;
                double a = std::fabs(work_[r]);
                if (a > pmax || (a == pmax && prow >= 0 && r < prow)) {
                    pmax = a;
                    prow = r;
                }
            }
            if (prow < 0) {
                // numerically singular: swap in the slack of the first unpivoted row
                int repl = -1;
                for (int r = 0; r < m_; ++r)
                    if (!pivoted[r] && state_[n_ + r] < 0) { repl = r; break; }
                if (repl < 0) throw std::runtime_error("lp: unrepairable singular basis");
                for (int r : touched) work_[r] = 0.0;
                int old = basic_[pos];
                state_[old] = offbasis_state(old);
                basic_[pos] = n_ + repl;
                state_[n_ + repl] = pos;
                --pos;
                continue;
            }

            EtaStep step;
            step.pivot_row = prow;
            step.pivot_val = work_[prow];
            for (int r : touched) {
                double v = work_[r];
                work_[r] = 0.0;
                if (v == 0.0 || r == prow) continue;
                if (pivoted[r]) step.ucol.push_back({rowstep[r], v});
                else if (std::fabs(v) > 1e-14) step.lmult.push_back({r, v / step.pivot_val});
            }
            pivoted[prow] = 1;
            rowstep[prow] = pos;
            lu_.push_back(std::move(step));
        }
    }

    // dense row-space v -> solution of B z = v, indexed by basis position
    void ftran(std::vector<double>& v) {
        for (const auto& s : lu_) {
            double t = v[s.pivot_row];
            if (t != 0.0)
                for (auto [r, mu] : s.lmult) v[r] -= mu * t;
        }
        std::vector<double> y(m_);
        for (int s = 0; s < m_; ++s) y[s] = v[lu_[s].pivot_row];
        for (int s = m_ - 1; s >= 0; --s) {
            double ys = y[s] / lu_[s].pivot_val;
            y[s] = ys;
            if (ys != 0.0)
                for (auto [i, u] : lu_[s].ucol) y[i] -= u * ys;
        }
        v.swap(y);
        for (const auto& e : etas_) {
            double vp = v[e.pos];
            if (vp == 0.0) continue;
            double t = vp / e.pivot;
            for (auto [p, w] : e.col)
                if (p != e.pos) v[p] -= w * t;
            v[e.pos] = t;
        }
    }

    // c over basis positions -> y with B^T y = c, in row space
    void btran(std::vector<double>& c) {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double dot = 0.0;
            for (auto [p, w] : it->col)
                if (p != it->pos) dot += w * c[p];
            c[it->pos] = (c[it->pos] - dot) / it->pivot;
        }
        std::vector<double> u(m_, 0.0);
        for (int s = 0; s < m_; ++s) {
            double d = 0.0;
            for (auto [i, uv] : lu_[s].ucol) d += uv * u[i];
            u[s] = (c[s] - d) / lu_[s].pivot_val;
        }
        std::fill(c.begin(), c.end(), 0.0);
        for (int s = 0; s < m_; ++s) c[lu_[s].pivot_row] = u[s];
        for (int s = m_ - 1; s >= 0; --s) {
            const auto& st = lu_[s];
            double acc = c[st.pivot_row];
            for (auto [r, mu] : st.lmult) acc -= mu * c[r];
            c[st.pivot_row] = acc;
        }
    }

    void compute_basics() {
        std::vector<double> v(m_, 0.0);
        for (int r = 0; r < m_; ++r) v[r] = lp_.rhs[r];
        for (int j = 0; j < total_; ++j) {
            if (state_[j] >= 0) continue;
            double xj = nonbasic_value(j);
            xval_[j] = xj;
            if (xj != 0.0)
                for (auto [r, c] : cols_[j]) v[r] -= c * xj;
        }
        ftran(v);
        for (int pos = 0; pos < m_; ++pos) xval_[basic_[pos]] = v[pos];
    }

    double infeasibility() const {
        double f = 0.0;
        for (int pos = 0; pos < m_; ++pos) {
            int j = basic_[pos];
            if (xval_[j] < clo_[j] - kFeasTol) f += clo_[j] - xval_[j];
            else if (xval_[j] > cup_[j] + kFeasTol) f += xval_[j] - cup_[j];
        }
        return f;
    }

    // 0 = phase optimal (or stuck), 1 = unbounded, 2 = iteration limit
    int iterate(int phase, int max_iters) {
        std::vector<double> y(m_), w(m_);
        int since_refactor = 0;
        while (true) {
            if (iterations_ >= max_iters) return 2;

            std::fill(y.begin(), y.end(), 0.0);
            bool any_infeasible = false;
            for (int pos = 0; pos < m_; ++pos) {
                int j = basic_[pos];
                if (phase == 1) {
                    if (xval_[j] < clo_[j] - kFeasTol) { y[pos] = -1.0; any_infeasible = true; }
                    else if (xval_[j] > cup_[j] + kFeasTol) { y[pos] = 1.0; any_infeasible = true; }
                } else {
                    y[pos] = j < n_ ? lp_.obj[j] : 0.0;
                }
            }
            if (phase == 1 && !any_infeasible) return 0;
            btran(y);

            const double enter_tol = phase == 1 ? 1e-7 : kOptTol;
            int enter = -1, dir = +1;
            double best = -enter_tol;
            for (int j = 0; j < total_; ++j) {
                if (state_[j] >= 0 || clo_[j] == cup_[j]) continue;
                double d = phase == 2 && j < n_ ? lp_.obj[j] : 0.0;
                for (auto [r, c] : cols_[j]) d -= y[r] * c;
                double score;
                int jdir;
                if (state_[j] == kAtLower) { score = d; jdir = +1; }
                else if (state_[j] == kAtUpper) { score = -d; jdir = -1; }
                else { score = -std::fabs(d); jdir = d > 0 ? -1 : +1; }
                if (bland_) {
                    if (score < -enter_tol) { enter = j; dir = jdir; break; }
                } else if (score < best) {
                    best = score;
                    enter = j;
                    dir = jdir;
                }
            }
            if (enter < 0) return 0;

            std::fill(w.begin(), w.end(), 0.0);
            for (auto [r, c] : cols_[enter]) w[r] = c;
            ftran(w);

            double limit = kInf;
            int leave_pos = -1;
            double leave_to = 0.0;
            for (int pos = 0; pos < m_; ++pos) {
                double wp = dir * w[pos];
                if (std::fabs(wp) < kPivotTol) continue;
                int j = basic_[pos];
                double target;
                if (wp > 0) { // basic decreases
                    if (xval_[j] > cup_[j] + kFeasTol) target = cup_[j];
                    else if (clo_[j] == -kInf) continue;
                    else {
                        target = clo_[j];
                        if (xval_[j] < target - kFeasTol) continue; // moving away from violation
                    }
                } else { // basic increases
                    if (xval_[j] < clo_[j] - kFeasTol) target = clo_[j];
                    else if (cup_[j] == kInf) continue;
                    else {
                        target = cup_[j];
                        if (xval_[j] > target + kFeasTol) continue;
                    }
                }
                double t = (xval_[j] - target) / wp;
                if (t < 0.0) t = 0.0;
                if (t < limit - 1e-12 ||
                    (t < limit + 1e-12 && leave_pos >= 0 &&
                     std::fabs(w[pos]) > std::fabs(w[leave_pos]) + 1e-12)) {
                    limit = t;
                    leave_pos = pos;
                    leave_to = target;
                }
            }
            double bound_flip = cup_[enter] - clo_[enter];

            ++iterations_;
            ++since_refactor;

            if (leave_pos < 0 && bound_flip == kInf) {
                return phase == 1 ? 0 : 1;
            }
            if (bound_flip != kInf && (leave_pos < 0 || bound_flip < limit - 1e-12)) {
                state_[enter] = state_[enter] == kAtLower ? kAtUpper : kAtLower;
                for (int pos = 0; pos < m_; ++pos)
                    if (w[pos] != 0.0) xval_[basic_[pos]] -= dir * bound_flip * w[pos];
                xval_[enter] = nonbasic_value(enter);
                continue;
            }

            double theta = limit;
            if (theta < 1e-11) {
                if (++degenerate_run_ > 2000) bland_ = true;
            } else {
                degenerate_run_ = 0;
                bland_ = false;
            }

            for (int pos = 0; pos < m_; ++pos)
                if (w[pos] != 0.0) xval_[basic_[pos]] -= dir * theta * w[pos];
            xval_[enter] = nonbasic_value(enter) + dir * theta;
            int leave_col = basic_[leave_pos];
            xval_[leave_col] = leave_to;
            state_[leave_col] = leave_to == clo_[leave_col] ? kAtLower : kAtUpper;
            basic_[leave_pos] = enter;
            state_[enter] = leave_pos;

            UpdateEta e;
            e.pos = leave_pos;
            e.pivot = w[leave_pos];
            for (int pos = 0; pos < m_; ++pos)
                if (w[pos] != 0.0) e.col.push_back({pos, w[pos]});
            etas_.push_back(std::move(e));

            if (since_refactor >= kRefactorEvery || std::fabs(e.pivot) < 1e-7) {
                refactor();
                compute_basics();
                since_refactor = 0;
            }
        }
    }
};

LpResult Simplex::run(const Basis* warm) {
    LpResult res;
    xval_.assign(total_, 0.0);
    if (!(warm && !warm->empty() && load_basis(*warm))) default_basis();
    refactor();
    compute_basics();

    const int max_iters = 200000 + 200 * (m_ + n_);

    // drive to primal feasibility; values are recomputed exactly between passes so a
    // noisy incremental pass can never misreport feasibility or infeasibility
    auto reach_feasible = [&](int& rc_out) {
        rc_out = 0;
        for (int pass = 0; pass < 50; ++pass) {
            if (infeasibility() <= kFeasTol) return true;
            int before = iterations_;
            rc_out = iterate(1, max_iters);
            refactor();
            compute_basics();
            if (rc_out == 2) return false;
            if (iterations_ == before) break; // phase-1 optimal and still infeasible
        }
        return infeasibility() <= 1e-7;
    };

    int rc1 = 0;
    if (!reach_feasible(rc1)) {
        res.status = rc1 == 2 ? LpStatus::IterationLimit : LpStatus::Infeasible;
        res.iterations = iterations_;
        return res;
    }

    int rc = iterate(2, max_iters);
    refactor();
    compute_basics();
    for (int round = 0; round < 10 && rc == 0 && infeasibility() > kFeasTol; ++round) {
        int rcp = 0;
        if (!reach_feasible(rcp)) {
            res.status = rcp == 2 ? LpStatus::IterationLimit : LpStatus::Numerical;
            res.iterations = iterations_;
            return res;
        }
        int before = iterations_;
        rc = iterate(2, max_iters);
        refactor();
        compute_basics();
        if (iterations_ == before) break;
    }
    res.iterations = iterations_;
    if (rc == 1) {
        res.status = LpStatus::Unbounded;
        return res;
    }
    if (rc == 2) {
        res.status = LpStatus::IterationLimit;
        return res;
    }
    if (infeasibility() > 1e-6) {
        res.status = LpStatus::Numerical;
        return res;
    }

    res.status = LpStatus::Optimal;
    res.x.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) res.x[j] = xval_[j];
    res.objective = 0.0;
    for (int j = 0; j < n_; ++j) res.objective += lp_.obj[j] * xval_[j];

    std::vector<double> y(m_, 0.0);
    for (int pos = 0; pos < m_; ++pos) {
        int j = basic_[pos];
        y[pos] = j < n_ ? lp_.obj[j] : 0.0;
    }
    btran(y);
    res.duals = y;
    res.reduced_costs.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
        double d = lp_.obj[j];
        for (auto [r, c] : cols_[j]) d -= y[r] * c;
        res.reduced_costs[j] = state_[j] >= 0 ? 0.0 : d;
    }
    res.dual_objective = 0.0;
    for (int r = 0; r < m_; ++r) res.dual_objective += y[r] * lp_.rhs[r];
    for (int j = 0; j < total_; ++j) {
        if (state_[j] >= 0) continue;
        double xb = nonbasic_value(j);
        if (xb == 0.0) continue;
        double d = j < n_ ? lp_.obj[j] : 0.0;
        for (auto [r, c] : cols_[j]) d -= y[r] * c;
        res.dual_objective += d * xb;
    }

    res.basis.state = state_;
    return res;
}

} // namespace

LpResult lp_solve(const LinearProgram& lp, const Basis* warm) {
    if (lp.n_vars() == 0) {
        LpResult r;
        r.status = LpStatus::Optimal;
        r.duals.assign(lp.n_rows(), 0.0);
        for (int i = 0; i < lp.n_rows(); ++i) {
            bool ok = true;
            switch (lp.sense[i]) {
                case Sense::LE: ok = 0.0 <= lp.rhs[i] + 1e-9; break;
                case Sense::GE: ok = 0.0 >= lp.rhs[i] - 1e-9; break;
                case Sense::EQ: ok = std::fabs(lp.rhs[i]) <= 1e-9; break;
            }
            if (!ok) r.status = LpStatus::Infeasible;
        }
        return r;
    }
    Simplex s(lp);
    return s.run(warm);
}

void write_lp_text(const LinearProgram& lp, const std::vector<char>& integer_mask,
                   const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    auto vname = [&](int j) {
        return lp.col_name.size() > static_cast<size_t>(j) && !lp.col_name[j].empty()
                   ? lp.col_name[j]
                   : "x" + std::to_string(j);
    };
    out << "Minimize\n obj:";
    for (int j = 0; j < lp.n_vars(); ++j)
        if (lp.obj[j] != 0.0)
            out << (lp.obj[j] >= 0 ? " + " : " - ") << std::fabs(lp.obj[j]) << " " << vname(j);
    out << "\nSubject To\n";
    for (int r = 0; r < lp.n_rows(); ++r) {
        std::string rn = lp.row_name.size() > static_cast<size_t>(r) && !lp.row_name[r].empty()
                             ? lp.row_name[r]
                             : "c" + std::to_string(r);
        out << " " << rn << ":";
        if (lp.rows[r].empty()) out << " 0 " << vname(0);
        for (auto [j, c] : lp.rows[r])
            out << (c >= 0 ? " + " : " - ") << std::fabs(c) << " " << vname(j);
        switch (lp.sense[r]) {
            case Sense::LE: out << " <= "; break;
            case Sense::GE: out << " >= "; break;
            case Sense::EQ: out << " = "; break;
        }
        out << lp.rhs[r] << "\n";
    }
    out << "Bounds\n";
    for (int j = 0; j < lp.n_vars(); ++j) {
        if (lp.lo[j] == 0.0 && lp.up[j] == kInf) continue;
        if (lp.lo[j] == -kInf) out << " -inf";
        else out << " " << lp.lo[j];
        out << " <= " << vname(j) << " <= ";
        if (lp.up[j] == kInf) out << "+inf\n";
        else out << lp.up[j] << "\n";
    }
    bool any_int = false;
    for (char c : integer_mask) any_int = any_int || (c != 0);
    if (any_int) {
        out << "Generals\n";
        for (int j = 0; j < lp.n_vars(); ++j)
            if (j < static_cast<int>(integer_mask.size()) && integer_mask[j])
                out << " " << vname(j) << "\n";
    }
    out << "End\n";
}

} // namespace esbilr
