#include "dpinn/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dpinn::exact {

namespace {

double sech(double v) { return 1.0 / std::cosh(v); }

// Root of a strictly increasing f on [lo, hi] with f(lo) <= 0 <= f(hi):
// Newton steps, falling back to bisection whenever a step leaves the bracket.
template <typename F, typename DF>
double solve_increasing(F f, DF df, double lo, double hi, double guess) {
    constexpr int max_iter = 200;
    constexpr double tol = 1e-12;
    double x = std::clamp(guess, lo, hi);
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x);
        if (fx == 0.0) {
            return x;
        }
        if (fx < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double d = df(x);
        double next = x - fx / d;
        if (!(d > 0.0) || !(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        const double step = std::abs(next - x);
        x = next;
        // Run to rounding level rather than stopping at tol, so that finite
        // differences of the result stay smooth.
        const double ulp = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
        if (step <= ulp || hi - lo <= ulp) {
            return x;
        }
    }
    if (hi - lo > tol) {
        throw std::runtime_error("implicit soliton coordinate did not converge");
    }
    return x;
}

// ln((a + b e^s) / (b + a e^s)), evaluated without overflow.
double log_ratio(double a, double b, double s) {
    if (s <= 0.0) {
        const double e = std::exp(s);
        return std::log((a + b * e) / (b + a * e));
    }
    const double e = std::exp(-s);
    return std::log((a * e + b) / (b * e + a));
}

struct ChDoubleConstants {
    double c1, c2, w1, w2, A, a1, a2, b1, b2, v12, b12;
};

ChDoubleConstants ch_double_constants(const ChDoubleParams& prm) {
    const double k = prm.k;
    const double kp1 = k * prm.p1;
    const double kp2 = k * prm.p2;
    if (!(kp1 > 0.0 && kp1 < 1.0 && kp2 > 0.0 && kp2 < 1.0)) {
        throw std::invalid_argument("CH double soliton needs 0 < k p_i < 1");
    }
    ChDoubleConstants c{};
    const double d1 = 1.0 - kp1 * kp1;
    const double d2 = 1.0 - kp2 * kp2;
    c.c1 = 2.0 * k * k * k / d1;
    c.c2 = 2.0 * k * k * k / d2;
    c.w1 = -prm.p1 * c.c1;
    c.w2 = -prm.p2 * c.c2;
    const double dp = prm.p1 - prm.p2;
    c.A = dp * dp / ((prm.p1 + prm.p2) * (prm.p1 + prm.p2));
    c.a1 = 1.0 + kp1;
    c.a2 = 1.0 + kp2;
    c.b1 = 1.0 - kp1;
    c.b2 = 1.0 - kp2;
    c.v12 = 4.0 * k * k * k * dp * dp / (d1 * d2);
    c.b12 = 8.0 * std::pow(k, 6) * dp * dp * (1.0 - kp1 * kp1 * kp2 * kp2) / (d1 * d1 * d2 * d2);
    return c;
}

void ch_double_phases(double y, double t, const ChDoubleParams& prm, const ChDoubleConstants& c, double& th1,
                      double& th2) {
    th1 = prm.p1 * (y - c.c1 * t + prm.alpha1);
    th2 = prm.p2 * (y - c.c2 * t + prm.alpha2);
}

}  // namespace

double kdv_single(double x, double t) {
    const double s = sech(std::sqrt(0.75) * (x - 3.0 * t));
    return 9.0 * s * s;
}

double kdv_double(double x, double t, double a, double b) {
    if (!(a > 0.0 && b > a)) {
        throw std::invalid_argument("KdV double soliton needs 0 < a < b");
    }
    // 6(b-a) (b csch^2 B + a sech^2 A) / (sqrt(a) tanh A - sqrt(b) coth B)^2,
    // multiplied through by tanh^2 B so that no term is singular.
    const double A = std::sqrt(a / 2.0) * (x - 2.0 * a * t);
    const double B = std::sqrt(b / 2.0) * (x - 2.0 * b * t);
    const double sA = sech(A);
    const double sB = sech(B);
    const double tA = std::tanh(A);
    const double tB = std::tanh(B);
    const double den = std::sqrt(b) - std::sqrt(a) * tA * tB;
    return 6.0 * (b - a) * (b * sB * sB + a * sA * sA * tB * tB) / (den * den);
}

double kdv_param(double x, double t, double alpha, double beta, double gamma, double kappa) {
    if (!(alpha > beta) || gamma == 0.0 || !(kappa > 0.0)) {
        throw std::invalid_argument("parametric KdV soliton needs alpha > beta, gamma != 0, kappa > 0");
    }
    const double amp = alpha - beta;
    const double speed = beta + amp / 3.0;
    const double s = sech(std::sqrt(amp / (12.0 * kappa)) * (x - speed * t));
    return beta / gamma + amp / gamma * s * s;
}

double kawahara_single(double x, double t, double x0) {
    const double s = sech((x - 205.0 / 169.0 * t - x0) / (2.0 * std::sqrt(13.0)));
    const double s2 = s * s;
    return 105.0 / 169.0 * s2 * s2;
}

double ch_phase(double theta, double k, double p) {
    return theta / k + p * log_ratio(1.0 + k * p, 1.0 - k * p, theta);
}

double ch_phase_inverse(double s, double k, double p) {
    const double kp = k * p;
    if (!(kp > 0.0 && kp < 1.0)) {
        throw std::invalid_argument("CH soliton needs 0 < kp < 1");
    }
    const double a = 1.0 + kp;
    const double b = 1.0 - kp;
    // |Theta(theta) - theta/k| <= p ln(a/b) brackets the root.
    const double g = p * std::log(a / b);
    auto f = [&](double th) { return ch_phase(th, k, p) - s; };
    auto df = [&](double th) {
        const double e = std::exp(-std::abs(th));
        // d/dtheta ln((a + b e^th)/(b + a e^th)) = (b^2 - a^2) e^th / ((a + b e^th)(b + a e^th)), even in th
        return 1.0 / k + p * (b * b - a * a) * e / ((a + b * e) * (b + a * e));
    };
    const double lo = k * (s - g) - 1e-9;
    const double hi = k * (s + g) + 1e-9;
    return solve_increasing(f, df, lo, hi, k * s);
}

double ch_single(double x, double t, double k, double p, double x0) {
    const double kp = k * p;
    const double c_tilde = 2.0 * k * k / (1.0 - kp * kp);
    const double c = k * c_tilde;
    const double theta = ch_phase_inverse(p * (x - c_tilde * t + x0), k, p);
    return 2.0 * k * c * p * p / ((1.0 + kp * kp) + (1.0 - kp * kp) * std::cosh(theta));
}

double ch_double_position(double y, double t, const ChDoubleParams& prm) {
    const auto c = ch_double_constants(prm);
    double th1 = 0.0;
    double th2 = 0.0;
    ch_double_phases(y, t, prm, c, th1, th2);
    const double m = std::max({0.0, th1, th2, th1 + th2});
    const double e0 = std::exp(-m);
    const double e1 = std::exp(th1 - m);
    const double e2 = std::exp(th2 - m);
    const double e12 = std::exp(th1 + th2 - m);
    const double num = c.a1 * c.a2 * e0 + c.b1 * c.a2 * e1 + c.b2 * c.a1 * e2 + c.b1 * c.b2 * c.A * e12;
    const double den = c.b1 * c.b2 * e0 + c.a1 * c.b2 * e1 + c.a2 * c.b1 * e2 + c.a1 * c.a2 * c.A * e12;
    const double drift = prm.with_background ? prm.k * prm.k * t : 0.0;
    return y / prm.k + std::log(num / den) + drift + prm.alpha;
}

double ch_double_of_y(double y, double t, const ChDoubleParams& prm) {
    const auto c = ch_double_constants(prm);
    double th1 = 0.0;
    double th2 = 0.0;
    ch_double_phases(y, t, prm, c, th1, th2);
    // Every term is scaled by e^{-2m}, m = max exponent of f.
    const double m = std::max({0.0, th1, th2, th1 + th2});
    const double f = std::exp(-m) + std::exp(th1 - m) + std::exp(th2 - m) + c.A * std::exp(th1 + th2 - m);
    auto ex = [&](double e) { return std::exp(e - 2.0 * m); };
    const double numer = c.w1 * c.w1 * ex(th1) + c.w2 * c.w2 * ex(th2) + c.b12 * ex(th1 + th2) +
                         c.A * (c.w1 * c.w1 * ex(th1 + 2.0 * th2) + c.w2 * c.w2 * ex(2.0 * th1 + th2));
    const double p1s = prm.p1 * prm.p1;
    const double p2s = prm.p2 * prm.p2;
    const double s = c.c1 * p1s * ex(th1) + c.c2 * p2s * ex(th2) + c.v12 * ex(th1 + th2) +
                     c.A * (c.c1 * p1s * ex(th1 + 2.0 * th2) + c.c2 * p2s * ex(2.0 * th1 + th2));
    // r f^2 = k f^2 + 2 s
    const double value = 2.0 / prm.k * numer / (prm.k * f * f + 2.0 * s);
    return prm.with_background ? prm.k * prm.k + value : value;
}

double ch_double(double x, double t, const ChDoubleParams& prm) {
    const auto c = ch_double_constants(prm);
    const double drift = prm.with_background ? prm.k * prm.k * t : 0.0;
    // The logarithm in x(y) is bounded by ln(a1 a2 / (b1 b2)).
    const double g = std::log(c.a1 * c.a2 / (c.b1 * c.b2));
    const double target = x - drift - prm.alpha;
    auto f = [&](double y) { return ch_double_position(y, t, prm) - x; };
    auto df = [&](double y) {
        double th1 = 0.0;
        double th2 = 0.0;
        ch_double_phases(y, t, prm, c, th1, th2);
        const double m = std::max({0.0, th1, th2, th1 + th2});
        const double e0 = std::exp(-m);
        const double e1 = std::exp(th1 - m);
        const double e2 = std::exp(th2 - m);
        const double e12 = std::exp(th1 + th2 - m);
        const double pp = prm.p1 + prm.p2;
        const double num = c.a1 * c.a2 * e0 + c.b1 * c.a2 * e1 + c.b2 * c.a1 * e2 + c.b1 * c.b2 * c.A * e12;
        const double den = c.b1 * c.b2 * e0 + c.a1 * c.b2 * e1 + c.a2 * c.b1 * e2 + c.a1 * c.a2 * c.A * e12;
        const double dnum = prm.p1 * c.b1 * c.a2 * e1 + prm.p2 * c.b2 * c.a1 * e2 + pp * c.b1 * c.b2 * c.A * e12;
        const double dden = prm.p1 * c.a1 * c.b2 * e1 + prm.p2 * c.a2 * c.b1 * e2 + pp * c.a1 * c.a2 * c.A * e12;
        return 1.0 / prm.k + dnum / num - dden / den;
    };
    const double lo = prm.k * (target - g) - 1e-9;
    const double hi = prm.k * (target + g) + 1e-9;
    const double y = solve_increasing(f, df, lo, hi, prm.k * target);
    return ch_double_of_y(y, t, prm);
}

double bo_periodic_single(double x, double t, double L, double c, double x0) {
    const double delta = std::numbers::pi / (c * L);
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("periodic BO soliton needs c L > pi");
    }
    return 2.0 * c * delta * delta / (1.0 - std::sqrt(1.0 - delta * delta) * std::cos(c * delta * (x - c * t - x0)));
}

double bo_line_double(double x, double t, double c1, double c2) {
    if (!(c1 > 0.0 && c2 > 0.0) || c1 == c2) {
        throw std::invalid_argument("BO double soliton needs distinct positive speeds");
    }
    const double l1 = x - c1 * t;
    const double l2 = x - c2 * t;
    const double dc2 = (c1 - c2) * (c1 - c2);
    const double num = 4.0 * c1 * c2 * (c1 * l1 * l1 + c2 * l2 * l2 + std::pow(c1 + c2, 3) / (c1 * c2 * dc2));
    const double q = c1 * c2 * l1 * l2 - (c1 + c2) * (c1 + c2) / dc2;
    const double r = c1 * l1 + c2 * l2;
    return num / (q * q + r * r);
}

Reference::Reference(std::string name, int input_dim, Fn fn)
    : name_(std::move(name)), input_dim_(input_dim), fn_(std::move(fn)) {}

double Reference::at(double t, double x) const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(input_dim_);
    p(0) = t;
    p(1) = x;
    return fn_(p);
}

Eigen::ArrayXd Reference::evaluate(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
    Eigen::ArrayXd out(points.cols());
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
        out(c) = fn_(points.col(c));
    }
    return out;
}

std::vector<double> central_weights(int n, int m) {
    // Fornberg's recursion on the nodes -m..m.
    const int count = 2 * m + 1;
    std::vector<std::vector<double>> c(static_cast<std::size_t>(count), std::vector<double>(static_cast<std::size_t>(n + 1), 0.0));
    auto node = [&](int i) { return static_cast<double>(i - m); };
    double c1 = 1.0;
    double c4 = node(0);
    c[0][0] = 1.0;
    for (int i = 1; i < count; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const int mn = std::min(i, n);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = node(i);
        for (int j = 0; j < i; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            const double c3 = node(i) - node(j);
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    const auto kk = static_cast<std::size_t>(k);
                    c[ii][kk] = c1 * (k * c[ii - 1][kk - 1] - c5 * c[ii - 1][kk]) / c2;
                }
                c[ii][0] = -c1 * c5 * c[ii - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) {
                const auto kk = static_cast<std::size_t>(k);
                c[jj][kk] = (c4 * c[jj][kk] - k * c[jj][kk - 1]) / c3;
            }
            c[jj][0] = c4 * c[jj][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        w[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)];
    }
    return w;
}

Eigen::ArrayXd Reference::derivative(const Eigen::Ref<const Eigen::MatrixXd>& points, int i, int j, double h) const {
    if (i == 0 && j == 0) {
        return evaluate(points);
    }
    if (h <= 0.0) {
        h = i + j <= 3 ? 0.01 : 0.05;
    }
    const int mt = i == 0 ? 0 : (i + 1) / 2 + 4;
    const int mx = j == 0 ? 0 : (j + 1) / 2 + 4;
    const auto wt = i == 0 ? std::vector<double>{1.0} : central_weights(i, mt);
    const auto wx = j == 0 ? std::vector<double>{1.0} : central_weights(j, mx);
    const double scale = std::pow(h, -(i + j));
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(points.cols());
    Eigen::VectorXd p(points.rows());
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
        double acc = 0.0;
        for (int a = -mt; a <= mt; ++a) {
            for (int b = -mx; b <= mx; ++b) {
                const double w = wt[static_cast<std::size_t>(a + mt)] * wx[static_cast<std::size_t>(b + mx)];
                if (w == 0.0) {
                    continue;
                }
                p = points.col(c);
                p(0) += a * h;
                p(1) += b * h;
                acc += w * fn_(p);
            }
        }
        out(c) = acc * scale;
    }
    return out;
}

std::vector<std::string> reference_names() {
    return {"zero", "kdv_single", "kdv_double", "kawahara_single", "kdv_param",
            "ch_single", "ch_double", "bo_periodic_single", "bo_line_double"};
}

Reference make_reference(const std::string& name) {
    using P = Eigen::Ref<const Eigen::VectorXd>;
    auto xt = [&](double (*f)(double, double)) {
        return Reference(name, 2, [f](const P& p) { return f(p(1), p(0)); });
    };
    if (name == "zero") {
        return Reference(name, 2, [](const P&) { return 0.0; });
    }
    if (name == "kdv_single") {
        return xt(kdv_single);
    }
    if (name == "kdv_double") {
        return xt([](double x, double t) { return kdv_double(x, t); });
    }
    if (name == "kawahara_single") {
        return xt([](double x, double t) { return kawahara_single(x, t); });
    }
    if (name == "kdv_param") {
        return Reference(name, 6, [](const P& p) { return kdv_param(p(1), p(0), p(2), p(3), p(4), p(5)); });
    }
    if (name == "ch_single") {
        return xt([](double x, double t) { return ch_single(x, t); });
    }
    if (name == "ch_double") {
        return xt([](double x, double t) { return ch_double(x, t); });
    }
    if (name == "bo_periodic_single") {
        return xt([](double x, double t) { return bo_periodic_single(x, t); });
    }
    if (name == "bo_line_double") {
        return xt([](double x, double t) { return bo_line_double(x, t); });
    }
    throw std::invalid_argument("unknown reference solution '" + name + "'");
}

}  // namespace dpinn::exact
