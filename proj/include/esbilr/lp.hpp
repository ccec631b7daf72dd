#ifndef ESBILR_LP_HPP
#define ESBILR_LP_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace esbilr {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LE, GE, EQ };

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, Numerical };

/// Row-oriented LP: min c'x  s.t.  a_r'x {<=,=,>=} b_r,  lo <= x <= up.
struct LinearProgram {
    std::vector<double> obj, lo, up;
    std::vector<std::vector<std::pair<int, double>>> rows;
    std::vector<Sense> sense;
    std::vector<double> rhs;
    std::vector<std::string> col_name, row_name;

    int n_vars() const { return static_cast<int>(obj.size()); }
    int n_rows() const { return static_cast<int>(rows.size()); }

    int add_var(double lo_, double up_, double obj_, std::string name = {});
    int add_row(Sense s, double rhs_, std::vector<std::pair<int, double>> coefs,
                std::string name = {});
    double activity(int row, const std::vector<double>& x) const;
};

/// Basis snapshot for warm starts: one state per structural-or-slack column.
/// Values: >=0 basic at that position, -1 at lower bound, -2 at upper bound, -3 free at zero.
struct Basis {
    std::vector<int32_t> state;
    bool empty() const { return state.empty(); }
};

struct LpResult {
    LpStatus status = LpStatus::Numerical;
    double objective = 0.0;
    std::vector<double> x;             // structural values
    std::vector<double> duals;         // one per row; rc_j = c_j - y'A_j
    std::vector<double> reduced_costs; // structural reduced costs
    Basis basis;
    int iterations = 0;

    bool optimal() const { return status == LpStatus::Optimal; }
    /// y'b plus bound contributions of nonbasic columns; equals `objective` at an optimum.
    double dual_objective = 0.0;
};

/// Deterministic bounded-variable primal simplex (composite phase 1, revised with
/// sparse LU + product-form updates). Identical input, identical output.
LpResult lp_solve(const LinearProgram& lp, const Basis* warm = nullptr);

void write_lp_text(const LinearProgram& lp, const std::vector<char>& integer_mask,
                   const std::string& path);

} // namespace esbilr

#endif
