#include "ovd/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ovd {

namespace {

// Fritsch-Carlson slopes for a shape-preserving cubic Hermite interpolant.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    std::vector<double> d(n, 0.0);
    if (n == 2) {
        d[0] = d[1] = (y[1] - y[0]) / (x[1] - x[0]);
        return d;
    }
    std::vector<double> h(n - 1), delta(n - 1);
    for (int i = 0; i < n - 1; ++i) {
        h[i] = x[i + 1] - x[i];
        delta[i] = (y[i + 1] - y[i]) / h[i];
    }
    for (int i = 1; i < n - 1; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            d[i] = 0.0;
        } else {
            double w1 = 2 * h[i] + h[i - 1];
            double w2 = h[i] + 2 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double d_end = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d_end * d0 <= 0)
            d_end = 0.0;
        else if (d0 * d1 <= 0 && std::abs(d_end) > 3 * std::abs(d0))
            d_end = 3 * d0;
        return d_end;
    };
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return d;
}

double hermite_eval(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& d, double xq) {
    const int n = static_cast<int>(x.size());
    if (xq <= x.front()) {  // linear continuation with the end slope
        return y.front() + d.front() * (xq - x.front());
    }
    if (xq >= x.back()) {
        return y.back() + d.back() * (xq - x.back());
    }
    int i = static_cast<int>(std::upper_bound(x.begin(), x.end(), xq) - x.begin()) - 1;
    i = std::clamp(i, 0, n - 2);
    double h = x[i + 1] - x[i];
    double t = (xq - x[i]) / h;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1;
    double h10 = t3 - 2 * t2 + t;
    double h01 = -2 * t3 + 3 * t2;
    double h11 = t3 - t2;
    return h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1];
}

std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open table file: " + path);
    std::vector<double> c0, c1;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ls(line);
        double a, b;
        if (!(ls >> a >> b)) {
            // a header line is allowed once; anything else is malformed
            if (c0.empty()) continue;
            throw DomainError("malformed row in " + path + ": " + line);
        }
        c0.push_back(a);
        c1.push_back(b);
    }
    if (c0.size() < 2) throw DomainError("table " + path + " needs at least 2 rows");
    return {std::move(c0), std::move(c1)};
}

}  // namespace

NonlinearitySpec NonlinearitySpec::constant(double a) {
    NonlinearitySpec s;
    s.kind_ = Kind::Constant;
    s.param_ = a;
    return s;
}

NonlinearitySpec NonlinearitySpec::power_minus_linear(double p) {
    if (!(p > 1.0)) throw DomainError("power_minus_linear: requires p > 1");
    NonlinearitySpec s;
    s.kind_ = Kind::PowerMinusLinear;
    s.param_ = p;
    return s;
}

NonlinearitySpec NonlinearitySpec::gelfand(double lambda) {
    if (!(lambda > 0.0)) throw DomainError("gelfand: requires lambda > 0");
    NonlinearitySpec s;
    s.kind_ = Kind::Gelfand;
    s.param_ = lambda;
    return s;
}

NonlinearitySpec NonlinearitySpec::linear(double lambda) {
    NonlinearitySpec s;
    s.kind_ = Kind::Linear;
    s.param_ = lambda;
    return s;
}

NonlinearitySpec NonlinearitySpec::tabulated(std::vector<double> u, std::vector<double> f,
                                             std::vector<double> fp) {
    if (u.size() != f.size() || u.size() != fp.size())
        throw DomainError("tabulated: inconsistent column lengths");
    if (u.size() < 2) throw DomainError("tabulated: need at least 2 rows");
    for (size_t i = 1; i < u.size(); ++i)
        if (!(u[i] > u[i - 1])) throw DomainError("tabulated: grid must be strictly increasing");
    NonlinearitySpec s;
    s.kind_ = Kind::Tabulated;
    s.tab_u_ = std::move(u);
    s.tab_f_ = std::move(f);
    s.tab_fp_ = std::move(fp);
    s.slope_f_ = pchip_slopes(s.tab_u_, s.tab_f_);
    s.slope_fp_ = pchip_slopes(s.tab_u_, s.tab_fp_);
    return s;
}

NonlinearitySpec NonlinearitySpec::tabulated_from_csv(const std::string& f_path,
                                                      const std::string& fp_path) {
    auto [uf, fv] = read_two_column_csv(f_path);
    auto [up, fpv] = read_two_column_csv(fp_path);
    if (uf.size() != up.size())
        throw DomainError("tabulated: f and f' tables have different lengths");
    for (size_t i = 0; i < uf.size(); ++i)
        if (uf[i] != up[i]) throw DomainError("tabulated: f and f' tables use different grids");
    return tabulated(std::move(uf), std::move(fv), std::move(fpv));
}

void NonlinearitySpec::validate_for_dimension(int n) const {
    if (kind_ == Kind::PowerMinusLinear && n > 2) {
        double pc = (n + 2.0) / (n - 2.0);
        if (!(param_ < pc))
            throw DomainError("power_minus_linear: p must be below (n+2)/(n-2) = " +
                              std::to_string(pc) + " for n = " + std::to_string(n));
    }
}

double NonlinearitySpec::eval_raw(double u) const {
    switch (kind_) {
        case Kind::Constant:
            return param_;
        case Kind::PowerMinusLinear:
            return std::pow(u, param_) - u;
        case Kind::Gelfand:
            return param_ * std::exp(u);
        case Kind::Linear:
            return param_ * u;
        case Kind::Tabulated:
            return hermite_eval(tab_u_, tab_f_, slope_f_, u);
    }
    return 0.0;
}

double NonlinearitySpec::eval_deriv_raw(double u) const {
    switch (kind_) {
        case Kind::Constant:
            return 0.0;
        case Kind::PowerMinusLinear:
            return param_ * std::pow(u, param_ - 1.0) - 1.0;
        case Kind::Gelfand:
            return param_ * std::exp(u);
        case Kind::Linear:
            return param_;
        case Kind::Tabulated:
            return hermite_eval(tab_u_, tab_fp_, slope_fp_, u);
    }
    return 0.0;
}

double NonlinearitySpec::eval(double u) const {
    if (u < 0.0) throw DomainError("nonlinearity eval: u < 0");
    return eval_raw(u);
}

double NonlinearitySpec::eval_deriv(double u) const {
    if (u < 0.0) throw DomainError("nonlinearity eval_deriv: u < 0");
    return eval_deriv_raw(u);
}

double NonlinearitySpec::eval_extended(double u) const {
    if (u >= 0.0) return eval_raw(u);
    return eval_raw(0.0) + eval_deriv_raw(0.0) * u;
}

double NonlinearitySpec::eval_deriv_extended(double u) const {
    if (u >= 0.0) return eval_deriv_raw(u);
    return eval_deriv_raw(0.0);
}

std::string NonlinearitySpec::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Constant:
            os << "f(u) = " << param_;
            break;
        case Kind::PowerMinusLinear:
            os << "f(u) = u^" << param_ << " - u";
            break;
        case Kind::Gelfand:
            os << "f(u) = " << param_ << " exp(u)";
            break;
        case Kind::Linear:
            os << "f(u) = " << param_ << " u";
            break;
        case Kind::Tabulated:
            os << "f tabulated on " << tab_u_.size() << " points";
            break;
    }
    return os.str();
}

}  // namespace ovd
