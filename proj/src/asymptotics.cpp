#include "orthostat/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace orthostat {

double ExpansionTable::eval(double ell) const {
    if (!(ell >= 1.0)) throw std::domain_error("ExpansionTable::eval: requires ell >= 1");
    const double logl = std::log(ell);
    double inv_pow = 1.0;  // 1 / ell^i
    double sum = 0.0;
    for (int i = 0; i <= max_order; ++i) {
        double log_pow = 1.0;
        double row = 0.0;
        for (int j = 0; j <= max_order; ++j) {
            row += coeff[i][j] * log_pow;
            log_pow *= logl;
        }
        sum += row * inv_pow;
        inv_pow /= ell;
    }
    return std::pow(ell, -static_cast<double>(p)) * sum;
}

double parse_coefficient(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::runtime_error("bad coefficient: " + text);
        return v;
    }
    const std::string num = text.substr(0, slash);
    const std::string den = text.substr(slash + 1);
    std::size_t p1 = 0, p2 = 0;
    const double a = std::stod(num, &p1);
    const double b = std::stod(den, &p2);
    if (p1 != num.size() || p2 != den.size() || b == 0.0)
        throw std::runtime_error("bad coefficient: " + text);
    return a / b;
}

std::vector<ExpansionTable> load_expansion_tables(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open expansion table file: " + path);

    const std::vector<std::string> order = {"K", "Theta", "V4", "D", "F", "A", "B",
                                            "P", "Q",     "R",  "S", "T", "U", "V6"};
    std::vector<ExpansionTable> tables(order.size());
    std::vector<bool> seen(order.size(), false);
    for (std::size_t t = 0; t < order.size(); ++t) tables[t].tensor = order[t];

    auto index_of = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(order.begin(), order.end(), name);
        if (it == order.end()) throw std::runtime_error("unknown tensor in table file: " + name);
        return static_cast<std::size_t>(it - order.begin());
    };

    std::string line;
    if (!std::getline(in, line) || line != "tensor,p,i,j,coefficient")
        throw std::runtime_error("expansion table file: unexpected header");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tensor, p_s, i_s, j_s, c_s;
        if (!std::getline(ss, tensor, ',') || !std::getline(ss, p_s, ',') ||
            !std::getline(ss, i_s, ',') || !std::getline(ss, j_s, ',') ||
            !std::getline(ss, c_s))
            throw std::runtime_error("expansion table file: malformed line " +
                                     std::to_string(lineno));
        const std::size_t t = index_of(tensor);
        const int p = std::stoi(p_s);
        const int i = std::stoi(i_s);
        const int j = std::stoi(j_s);
        if (i < 0 || i > ExpansionTable::max_order || j < 0 || j > ExpansionTable::max_order)
            throw std::runtime_error("expansion table file: index out of range at line " +
                                     std::to_string(lineno));
        if (seen[t] && tables[t].p != p)
            throw std::runtime_error("expansion table file: inconsistent exponent for " + tensor);
        tables[t].p = p;
        seen[t] = true;
        tables[t].coeff[i][j] = parse_coefficient(c_s);
        tables[t].raw[i][j] = c_s;
    }
    for (std::size_t t = 0; t < order.size(); ++t)
        if (!seen[t]) throw std::runtime_error("expansion table file: missing tensor " + order[t]);
    return tables;
}

const ExpansionTable& find_table(const std::vector<ExpansionTable>& tables,
                                 const std::string& tensor) {
    for (const auto& t : tables)
        if (t.tensor == tensor) return t;
    throw std::runtime_error("find_table: no table for tensor " + tensor);
}

double kernel_series_parametric(double ell, double log_l0) {
    const double L = std::log(ell);
    const double u = log_l0;
    const double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
    const double L2 = L * L, L3 = L2 * L, L4 = L3 * L;

    double v = 1.0 / (2.0 * ell);
    v += (5.0 / 24.0 * L - 5.0 / 24.0 * u) / (ell * ell);
    v += (25.0 / 288.0 * L2 + 5.0 * L * (-5.0 - 10.0 * u) / 288.0 +
          (53.0 + 25.0 * u + 25.0 * u2) / 288.0) /
         (ell * ell * ell);
    v += (125.0 / 3456.0 * L3 + 25.0 * L2 * (-25.0 - 30.0 * u) / 6912.0 +
          5.0 * L * (23.0 + 125.0 / 8.0 * u + 75.0 / 8.0 * u2) / 432.0 +
          (-8597.0 - 9200.0 * u - 3125.0 * u2 - 1250.0 * u3) / 34560.0) /
         (ell * ell * ell * ell);
    v += (625.0 / 41472.0 * L4 + 125.0 * L3 * (-65.0 - 60.0 * u) / 124416.0 +
          25.0 * L2 * (287.0 + 650.0 / 3.0 * u + 100.0 * u2) / 27648.0 +
          L * (-10897.0 - 21525.0 / 2.0 * u - 8125.0 / 2.0 * u2 - 1250.0 * u3) / 20736.0 +
          (-2479663.0 + 653820.0 * u + 322875.0 * u2 + 81250.0 * u3 + 18750.0 * u4) /
              1244160.0) /
         (ell * ell * ell * ell * ell);
    return v;
}

double ntk_series_parametric(double ell, double log_l0, double c_theta_10) {
    const double L = std::log(ell);
    const double u = log_l0;
    const double c = c_theta_10;
    const double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
    const double L2 = L * L, L3 = L2 * L, L4 = L3 * L, L5 = L4 * L;

    double v = 1.5;
    v += (-5.0 / 24.0 * L2 + L * (27.0 + 10.0 * u) / 24.0 + c) / ell;
    v += (-25.0 / 288.0 * L3 + 5.0 / 288.0 * L2 * (31.0 + 15.0 * u) +
          (447.0 + 205.0 * u) / 288.0 +
          L * (-313.0 - 175.0 * u - 50.0 * u2) / 288.0 + L * (5.0 / 12.0) * c -
          (4.0 + 5.0 * u) * c / 12.0) /
         (ell * ell);
    v += (-125.0 / 3456.0 * L4 + 125.0 / 864.0 * L3 * (2.0 + u) +
          (-183829.0 - 116850.0 * u - 26500.0 * u2) / 69120.0 -
          L2 * 25.0 * (143.0 + 93.0 * u + 25.0 * u2) / 3456.0 + L2 * (25.0 / 144.0) * c +
          (99.0 + 65.0 * u + 25.0 * u2) / 144.0 * c +
          L * (17031.0 + 10790.0 * u + 2650.0 * u2 + 500.0 * u3) / 6912.0 -
          L * (5.0 / 144.0) * (13.0 + 10.0 * u) * c) /
         (ell * ell * ell);
    v += (-625.0 / 41472.0 * L5 + 125.0 * L4 * (103.0 + 50.0 * u) / 82944.0 +
          (287109682.0 + 282873525.0 * u + 85689000.0 * u2 + 12240000.0 * u3) / 67184640.0 -
          L3 * 25.0 * (23863.0 + 16110.0 * u + 4050.0 * u2) / 746496.0 +
          L3 * (125.0 / 1728.0) * c -
          (21949.0 + 18100.0 * u + 6125.0 * u2 + 1250.0 * u3) / 17280.0 * c +
          L2 * (2029301.0 + 1492050.0 * u + 457875.0 * u2) / 746496.0 +
          L2 * (78750.0 * u3 / 746496.0 - 25.0 * (49.0 + 30.0 * u) / 3456.0 * c) +
          L * (-126292817.0 - 95368260.0 * u - 30944250.0 * u2) / 22394880.0 +
          L * (-5130000.0 * u3 - 675000.0 * u4) / 22394880.0 +
          L * 5.0 * (362.0 + 245.0 * u + 75.0 * u2) / 1728.0 * c) /
         (ell * ell * ell * ell);
    return v;
}

double quartic_series_parametric(double ell, double log_l0, double c_v_20) {
    const double L = std::log(ell);
    const double u = log_l0;
    double v = -1.0 / (2.0 * ell * ell);
    v += (-5.0 / 12.0 * L + (8.0 + 5.0 * u) / 12.0) / (ell * ell * ell);
    v += (-25.0 / 96.0 * L * L + L * (-167.0 + 75.0 * u) / 144.0 + c_v_20) /
         (ell * ell * ell * ell);
    return v;
}

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi,
              const char* what) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) {
        // scan the window for a sign change before giving up
        const int steps = 512;
        bool found = false;
        for (int i = 1; i <= steps; ++i) {
            const double x = lo + (hi - lo) * i / steps;
            const double fx = f(x);
            if (std::signbit(fx) != std::signbit(flo)) {
                hi = x;
                fhi = fx;
                lo = lo + (hi - lo) * (i - 1.0) / steps;
                flo = f(lo);
                found = true;
                break;
            }
        }
        if (!found)
            throw std::runtime_error(std::string("calibration error: no sign change for ") + what);
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

CalibrationResult calibrate_constants(double kernel1, double ntk1, double v41) {
    CalibrationResult res;
    res.log_l0 = bisect([&](double u) { return kernel_series_parametric(1.0, u) - kernel1; },
                        -12.0, 6.0, "log(l0)");
    res.c_theta_10 =
        bisect([&](double c) { return ntk_series_parametric(1.0, res.log_l0, c) - ntk1; },
               -100.0, 100.0, "NTK constant");
    res.c_v_20 =
        bisect([&](double c) { return quartic_series_parametric(1.0, res.log_l0, c) - v41; },
               -100.0, 100.0, "quartic constant");
    return res;
}

std::vector<ResidualEntry> residual_series(const std::vector<double>& recursion_values,
                                           const ExpansionTable& table) {
    std::vector<ResidualEntry> out;
    out.reserve(recursion_values.size());
    for (std::size_t idx = 0; idx < recursion_values.size(); ++idx) {
        const int ell = static_cast<int>(idx) + 1;
        const double rec = recursion_values[idx];
        const double exp_val = table.eval(static_cast<double>(ell));
        ResidualEntry entry;
        entry.ell = ell;
        if (rec == 0.0) {
            entry.absolute = true;
            entry.value = std::abs(exp_val);
        } else {
            entry.value = std::abs(rec - exp_val) / std::abs(rec);
        }
        out.push_back(entry);
    }
    return out;
}

}  // namespace orthostat
