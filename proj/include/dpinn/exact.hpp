#pragma once

/// \file exact.hpp
/// Reference solutions: closed-form solitons and the implicitly defined
/// Camassa-Holm solitons (inverted by safeguarded Newton iteration).

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace dpinn::exact {

/// 9 sech^2(sqrt(3/4) (x - 3t)).
double kdv_single(double x, double t);

/// Two-soliton of u_t + u u_x + u_xxx = 0 with speeds 2a < 2b, colliding at t = 0.
double kdv_double(double x, double t, double a = 0.5, double b = 1.0);

/// Soliton of u_t + gamma u u_x + kappa u_xxx = 0. Requires alpha > beta,
/// gamma != 0 and kappa > 0.
double kdv_param(double x, double t, double alpha, double beta, double gamma, double kappa);

/// Soliton of u_t + u_x + u u_x + u_xxx - u_xxxxx = 0 with peak at x0 for t = 0.
double kawahara_single(double x, double t, double x0 = 0.0);

/// Theta(theta) = theta/k + p ln(((1+kp) + (1-kp)e^theta) / ((1-kp) + (1+kp)e^theta)).
double ch_phase(double theta, double k, double p);
/// Inverse of ch_phase.
double ch_phase_inverse(double s, double k, double p);

/// Single soliton of the Camassa-Holm equation with kappa = k^2, speed 2k^2/(1-k^2p^2).
double ch_single(double x, double t, double k = 0.6, double p = 1.0, double x0 = 0.0);

struct ChDoubleParams {
    double k = 0.6;
    double p1 = 1.5;
    double p2 = 1.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double alpha = 0.0;
    /// false: decaying form solving the kappa = k^2 equation.
    /// true: form with far field k^2 and x drifting by k^2 t, solving kappa = 0.
    bool with_background = false;
};

/// x(y, t) for the double soliton (strictly increasing in y).
double ch_double_position(double y, double t, const ChDoubleParams& prm);
/// u as a function of the implicit coordinate y.
double ch_double_of_y(double y, double t, const ChDoubleParams& prm);
double ch_double(double x, double t, const ChDoubleParams& prm = {});

/// Periodic Benjamin-Ono soliton with half period L; needs cL > pi.
double bo_periodic_single(double x, double t, double L = 15.0, double c = 0.25, double x0 = 0.0);

/// Interacting Benjamin-Ono solitons on the real line.
double bo_line_double(double x, double t, double c1 = 2.0, double c2 = 1.0);

/// A reference solution as a function of a network input column
/// (t, x, parameters...).
class Reference {
public:
    using Fn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>& point)>;

    Reference() = default;
    Reference(std::string name, int input_dim, Fn fn);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] int input_dim() const noexcept { return input_dim_; }
    [[nodiscard]] explicit operator bool() const noexcept { return static_cast<bool>(fn_); }

    [[nodiscard]] double operator()(const Eigen::Ref<const Eigen::VectorXd>& point) const { return fn_(point); }
    [[nodiscard]] double at(double t, double x) const;

    /// Values at the columns of `points`.
    [[nodiscard]] Eigen::ArrayXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

    /// d_t^i d_x^j at the columns of `points` by eighth-order central
    /// differences with step h. The default step is 0.01 up to total order 3
    /// and 0.05 above, where rounding would dominate.
    [[nodiscard]] Eigen::ArrayXd derivative(const Eigen::Ref<const Eigen::MatrixXd>& points, int i, int j,
                                            double h = 0.0) const;

private:
    std::string name_;
    int input_dim_ = 2;
    Fn fn_;
};

/// Registered solutions by name: zero, kdv_single, kdv_double, kawahara_single,
/// kdv_param (6 inputs), ch_single, ch_double, bo_periodic_single, bo_line_double.
Reference make_reference(const std::string& name);
std::vector<std::string> reference_names();

/// Central-difference weights for the n-th derivative on nodes -m..m (unit spacing).
std::vector<double> central_weights(int n, int m);

}  // namespace dpinn::exact
