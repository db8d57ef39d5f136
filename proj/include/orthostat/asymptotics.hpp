#pragma once

#include <array>
#include <string>
#include <vector>

namespace orthostat {

/// Deep-layer series for one tensor: value(l) = l^(-p) sum_{i,j} c_{i,j} log(l)^j / l^i,
/// truncated at i, j <= 5. Coefficients absent from the bundled table are zero.
struct ExpansionTable {
    static constexpr int max_order = 5;

    std::string tensor;
    int p = 0;
    std::array<std::array<double, max_order + 1>, max_order + 1> coeff{};  // [i][j]
    std::array<std::array<std::string, max_order + 1>, max_order + 1> raw{};

    double eval(double ell) const;
};

/// Parse one coefficient string of the bundled table: either a decimal literal
/// or an integer fraction "a/b".
double parse_coefficient(const std::string& text);

/// Load the bundled coefficient file (CSV `tensor,p,i,j,coefficient`).
/// Returns the 14 tables in canonical tensor order
/// (K, Theta, V4, D, F, A, B, P, Q, R, S, T, U, V6).
std::vector<ExpansionTable> load_expansion_tables(const std::string& path);

const ExpansionTable& find_table(const std::vector<ExpansionTable>& tables,
                                 const std::string& tensor);

/// Deep-layer series with the calibration constants left symbolic: the scale
/// log(l0) enters the kernel series, and one further constant each enters the
/// NTK and quartic-vertex series. Evaluating these at l = 1 against the
/// layer-1 values fixes the constants.
double kernel_series_parametric(double ell, double log_l0);
double ntk_series_parametric(double ell, double log_l0, double c_theta_10);
double quartic_series_parametric(double ell, double log_l0, double c_v_20);

struct CalibrationResult {
    double log_l0 = 0.0;
    double c_theta_10 = 0.0;
    double c_v_20 = 0.0;
};

/// Nested 1-D root finds (bracketed bisection, 1e-10 tolerance in the
/// constant): log(l0) from the layer-1 kernel, then the NTK constant, then
/// the quartic constant. Throws a calibration error when no sign change is
/// found in the scan window.
CalibrationResult calibrate_constants(double kernel1, double ntk1, double v41);

struct ResidualEntry {
    int ell = 0;
    double value = 0.0;    // |recursion - expansion| / |recursion|, or absolute
    bool absolute = false; // set when the recursion value vanishes
};

/// Per-layer relative error between a recursion trajectory (values for
/// l = 1..L) and the table's series.
std::vector<ResidualEntry> residual_series(const std::vector<double>& recursion_values,
                                           const ExpansionTable& table);

}  // namespace orthostat
