#ifndef OVD_NONLINEARITY_HPP
#define OVD_NONLINEARITY_HPP

#include <string>
#include <vector>

#include "ovd/numerics.hpp"

namespace ovd {

// Reaction term f: [0, inf) -> R together with f'. Built-in families plus a
// tabulated form (monotone cubic interpolation; derivative values are part of
// the table, never differenced from f).
class NonlinearitySpec {
  public:
    enum class Kind { Constant, PowerMinusLinear, Gelfand, Linear, Tabulated };

    static NonlinearitySpec constant(double a);
    static NonlinearitySpec power_minus_linear(double p);  // f(u) = u^p - u, p > 1
    static NonlinearitySpec gelfand(double lambda);        // f(u) = lambda e^u, lambda > 0
    static NonlinearitySpec linear(double lambda);         // f(u) = lambda u
    static NonlinearitySpec tabulated(std::vector<double> u, std::vector<double> f,
                                      std::vector<double> fp);
    // two-column CSV files: (u, f) and (u, f')
    static NonlinearitySpec tabulated_from_csv(const std::string& f_path,
                                               const std::string& fp_path);

    Kind kind() const { return kind_; }
    double param() const { return param_; }

    // Subcriticality of the power family depends on the ambient dimension.
    void validate_for_dimension(int n) const;

    double eval(double u) const;        // throws DomainError for u < 0
    double eval_deriv(double u) const;  // throws DomainError for u < 0

    // Linear extension below zero, used by Newton/shooting transients:
    // f(u) = f(0) + f'(0) u for u < 0. Converged states must still be
    // positive; that is enforced by the callers.
    double eval_extended(double u) const;
    double eval_deriv_extended(double u) const;

    std::string describe() const;

  private:
    NonlinearitySpec() = default;

    double eval_raw(double u) const;
    double eval_deriv_raw(double u) const;

    Kind kind_ = Kind::Constant;
    double param_ = 0.0;
    // tabulated data and precomputed monotone-cubic slopes
    std::vector<double> tab_u_, tab_f_, tab_fp_, slope_f_, slope_fp_;
};

}  // namespace ovd

#endif
