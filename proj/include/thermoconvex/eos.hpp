#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "thermoconvex/dual2.hpp"
#include "thermoconvex/errors.hpp"
#include "thermoconvex/field.hpp"

namespace thermoconvex {

/// Reference state anchoring a fundamental potential u(v,s). The closed
/// forms only fix u up to this anchor; all differential relations are
/// anchor-independent and are what the checks certify.
struct ReferenceState {
    double v0 = 1.0;
    double s0 = 0.0;
    double u0 = 1.0;
};

// ---------------------------------------------------------------------------
// Ideal polytropic gas
// ---------------------------------------------------------------------------

/// Material constants of an ideal polytropic gas. Only two of
/// {R, c_v, c_p, gamma} are independent; the constructor completes the
/// other two and enforces gamma = c_p/c_v and R = c_p - c_v exactly.
struct IdealPolytropicParams {
    double R = 0.0;
    double c_v = 0.0;
    double c_p = 0.0;
    double gamma = 0.0;

    static IdealPolytropicParams from(std::optional<double> R,
                                      std::optional<double> c_v,
                                      std::optional<double> c_p,
                                      std::optional<double> gamma) {
        int given = int(R.has_value()) + int(c_v.has_value()) + int(c_p.has_value()) +
                    int(gamma.has_value());
        if (given != 2)
            throw ConfigError("ideal polytropic gas needs exactly two of R, c_v, c_p, gamma");
        IdealPolytropicParams p;
        if (R && c_v) {
            p.R = *R; p.c_v = *c_v; p.c_p = *R + *c_v; p.gamma = p.c_p / p.c_v;
        } else if (R && c_p) {
            p.R = *R; p.c_p = *c_p; p.c_v = *c_p - *R; p.gamma = p.c_p / p.c_v;
        } else if (R && gamma) {
            p.R = *R; p.gamma = *gamma; p.c_v = *R / (*gamma - 1.0); p.c_p = *gamma * p.c_v;
        } else if (c_v && c_p) {
            p.c_v = *c_v; p.c_p = *c_p; p.R = *c_p - *c_v; p.gamma = *c_p / *c_v;
        } else if (c_v && gamma) {
            p.c_v = *c_v; p.gamma = *gamma; p.R = (*gamma - 1.0) * *c_v; p.c_p = *gamma * *c_v;
        } else { // c_p && gamma
            p.c_p = *c_p; p.gamma = *gamma; p.c_v = *c_p / *gamma; p.R = p.c_p - p.c_v;
        }
        if (!(p.R > 0.0 && p.c_v > 0.0 && p.c_p > p.c_v && p.gamma > 1.0))
            throw ConfigError("ideal polytropic parameters must satisfy R > 0, c_v > 0, c_p > c_v, gamma > 1");
        return p;
    }
};

class IdealPolytropicGas {
public:
    IdealPolytropicGas(IdealPolytropicParams params, ReferenceState ref = {})
        : params_(params), ref_(ref) {
        if (!(ref_.v0 > 0.0 && ref_.u0 > 0.0))
            throw ConfigError("polytropic reference state needs v0 > 0 and u0 > 0");
    }

    const IdealPolytropicParams& params() const { return params_; }
    const ReferenceState& reference() const { return ref_; }
    double theta0() const { return ref_.u0 / params_.c_v; }

    /// Thermal equation of state p = R*rho*theta.
    double pressure_rho_theta(double rho, double theta) const {
        require_positive(rho, "rho");
        require_positive(theta, "theta");
        return params_.R * rho * theta;
    }

    /// Polytropic law p = (gamma-1)*rho*u.
    double pressure_rho_u(double rho, double u) const {
        require_positive(rho, "rho");
        require_positive(u, "u");
        return (params_.gamma - 1.0) * rho * u;
    }

    /// Fundamental potential u(v,s) anchored at the reference state:
    /// u = u0 (v0/v)^(gamma-1) exp((s-s0)/c_v). Not printed in closed
    /// form by the usual references; certified through the differential
    /// relations u_s = u/c_v and -u_v v = (gamma-1) u instead.
    template <typename T>
    T internal_energy_vs(const T& v, const T& s) const {
        using std::exp;
        using std::pow;
        return ref_.u0 * pow(ref_.v0 / v, params_.gamma - 1.0) *
               exp((s - ref_.s0) / params_.c_v);
    }

    template <typename T>
    T pressure_vs(const T& v, const T& s) const {
        return (params_.gamma - 1.0) * internal_energy_vs(v, s) / v;
    }

    template <typename T>
    T temperature_vs(const T& v, const T& s) const {
        return internal_energy_vs(v, s) / params_.c_v;
    }

    /// Caloric equation of state u(theta) = c_v theta (v-independent).
    template <typename T>
    T internal_energy_vtheta(const T& /*v*/, const T& theta) const {
        return params_.c_v * theta;
    }

    template <typename T>
    T pressure_vtheta(const T& v, const T& theta) const {
        return params_.R * theta / v;
    }

    /// p as a function of (v, specific internal energy); used for fluxes.
    template <typename T>
    T pressure_ve(const T& v, const T& e) const {
        return (params_.gamma - 1.0) * e / v;
    }

    double entropy_vtheta(double v, double theta) const {
        return ref_.s0 + params_.c_v * std::log(theta / theta0()) +
               params_.R * std::log(v / ref_.v0);
    }

    double entropy_vu(double v, double u) const {
        return ref_.s0 + params_.c_v * std::log(u / ref_.u0) +
               params_.R * std::log(v / ref_.v0);
    }

    ScalarField u_vs_field(Eigen::VectorXd lo, Eigen::VectorXd hi) const {
        DomainSpec dom(std::move(lo), std::move(hi));
        auto self = *this;
        return ScalarField::from_expression(
            "polytropic u(v,s)", {"v [m^3/kg]", "s [J/(kg K)]"}, std::move(dom),
            [self](const std::vector<Dual2>& x) {
                return self.internal_energy_vs(x[0], x[1]);
            });
    }

    ScalarField u_vtheta_field(Eigen::VectorXd lo, Eigen::VectorXd hi) const {
        DomainSpec dom(std::move(lo), std::move(hi));
        auto self = *this;
        return ScalarField::from_expression(
            "polytropic u(v,theta)", {"v [m^3/kg]", "theta [K]"}, std::move(dom),
            [self](const std::vector<Dual2>& x) {
                return self.internal_energy_vtheta(x[0], x[1]);
            });
    }

    ScalarField p_vtheta_field(Eigen::VectorXd lo, Eigen::VectorXd hi) const {
        DomainSpec dom(std::move(lo), std::move(hi));
        auto self = *this;
        return ScalarField::from_expression(
            "polytropic p(v,theta)", {"v [m^3/kg]", "theta [K]"}, std::move(dom),
            [self](const std::vector<Dual2>& x) {
                return self.pressure_vtheta(x[0], x[1]);
            });
    }

private:
    static void require_positive(double x, const char* name) {
        if (!(x > 0.0))
            throw DomainViolation(std::string(name) + " must be positive, got " +
                                  std::to_string(x));
    }

    IdealPolytropicParams params_;
    ReferenceState ref_;
};

// ---------------------------------------------------------------------------
// Van der Waals gas
// ---------------------------------------------------------------------------

/// Van der Waals constants. a = b = 0 degenerates to the ideal gas and
/// is accepted for test fixtures; c_v is taken constant (F'(theta) = c_v).
struct VanDerWaalsParams {
    double a = 0.0;
    double b = 0.0;
    double R = 1.0;
    double c_v = 1.0;

    void validate() const {
        if (!(a >= 0.0 && b >= 0.0 && R > 0.0 && c_v > 0.0))
            throw ConfigError("van der Waals parameters need a, b >= 0 and R, c_v > 0");
    }
};

class VanDerWaalsGas {
public:
    explicit VanDerWaalsGas(VanDerWaalsParams params) : params_(params) {
        params_.validate();
    }

    const VanDerWaalsParams& params() const { return params_; }

    /// Thermal equation of state p = R theta/(v-b) - a/v^2; may be
    /// negative, admissibility is the caller's decision.
    template <typename T>
    T pressure_vtheta(const T& v, const T& theta) const {
        return params_.R * theta / (v - params_.b) - params_.a / (v * v);
    }

    double pressure(double v, double theta) const {
        if (!(v > params_.b))
            throw DomainViolation("van der Waals pressure needs v > b");
        if (!(theta > 0.0)) throw DomainViolation("temperature must be positive");
        return pressure_vtheta(v, theta);
    }

    /// Caloric equation of state u = -a/v + c_v theta.
    template <typename T>
    T internal_energy_vtheta(const T& v, const T& theta) const {
        return params_.c_v * theta - params_.a / v;
    }

    double internal_energy(double v, double theta) const {
        if (!(v > params_.b))
            throw DomainViolation("van der Waals internal energy needs v > b");
        if (!(theta > 0.0)) throw DomainViolation("temperature must be positive");
        return internal_energy_vtheta(v, theta);
    }

    /// dp/dv at constant theta (closed form, used by the critical-point
    /// oracle below).
    double pressure_dv(double v, double theta) const {
        const double d = v - params_.b;
        return -params_.R * theta / (d * d) + 2.0 * params_.a / (v * v * v);
    }

    ScalarField u_vtheta_field(Eigen::VectorXd lo, Eigen::VectorXd hi) const {
        auto self = *this;
        DomainSpec dom(std::move(lo), std::move(hi), [self](const Eigen::VectorXd& x) {
            return x(0) > self.params_.b * (1.0 + 1e-9) + 1e-12;
        });
        return ScalarField::from_expression(
            "van der Waals u(v,theta)", {"v [m^3/kg]", "theta [K]"}, std::move(dom),
            [self](const std::vector<Dual2>& x) {
                return self.internal_energy_vtheta(x[0], x[1]);
            });
    }

    ScalarField p_vtheta_field(Eigen::VectorXd lo, Eigen::VectorXd hi) const {
        auto self = *this;
        DomainSpec dom(std::move(lo), std::move(hi), [self](const Eigen::VectorXd& x) {
            return x(0) > self.params_.b * (1.0 + 1e-9) + 1e-12;
        });
        return ScalarField::from_expression(
            "van der Waals p(v,theta)", {"v [m^3/kg]", "theta [K]"}, std::move(dom),
            [self](const std::vector<Dual2>& x) {
                return self.pressure_vtheta(x[0], x[1]);
            });
    }

    struct CriticalPoint {
        double v = 0.0;
        double theta = 0.0;
    };

    /// Solve {p_v = 0, p_vv = 0} numerically: bisection on theta of the
    /// maximum of p_v over v (the maximum of p_v decreases strictly with
    /// theta). Requires a, b > 0; the solution is the spinodal onset.
    CriticalPoint critical_point() const {
        if (!(params_.a > 0.0 && params_.b > 0.0))
            throw DomainViolation("critical point requires a > 0 and b > 0");
        const double v_lo = params_.b * 1.02;
        const double v_hi = params_.b * 50.0;

        auto max_pv = [&](double theta) {
            // dense scan plus golden-section refinement around the best cell
            const int n = 2000;
            double best_v = v_lo, best = -std::numeric_limits<double>::infinity();
            for (int i = 0; i <= n; ++i) {
                const double v = v_lo * std::pow(v_hi / v_lo, double(i) / n);
                const double val = pressure_dv(v, theta);
                if (val > best) { best = val; best_v = v; }
            }
            double a = best_v / std::pow(v_hi / v_lo, 2.0 / n);
            double b2 = best_v * std::pow(v_hi / v_lo, 2.0 / n);
            const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = b2 - phi * (b2 - a), x2 = a + phi * (b2 - a);
            double f1 = pressure_dv(x1, theta), f2 = pressure_dv(x2, theta);
            for (int it = 0; it < 200; ++it) {
                if (f1 < f2) {
                    a = x1; x1 = x2; f1 = f2;
                    x2 = a + phi * (b2 - a); f2 = pressure_dv(x2, theta);
                } else {
                    b2 = x2; x2 = x1; f2 = f1;
                    x1 = b2 - phi * (b2 - a); f1 = pressure_dv(x1, theta);
                }
            }
            return std::pair<double, double>(std::max(f1, f2), 0.5 * (a + b2));
        };

        const double theta_scale = params_.a / (params_.R * params_.b);
        double t_lo = 1e-3 * theta_scale, t_hi = theta_scale;
        while (max_pv(t_lo).first <= 0.0) t_lo *= 0.5;
        while (max_pv(t_hi).first >= 0.0) t_hi *= 2.0;
        for (int it = 0; it < 200 && (t_hi - t_lo) > 1e-14 * t_hi; ++it) {
            const double mid = 0.5 * (t_lo + t_hi);
            (max_pv(mid).first > 0.0 ? t_lo : t_hi) = mid;
        }
        const double theta_c = 0.5 * (t_lo + t_hi);
        return {max_pv(theta_c).second, theta_c};
    }

private:
    VanDerWaalsParams params_;
};

// ---------------------------------------------------------------------------
// Tait equation of state
// ---------------------------------------------------------------------------

/// Tait reference constants. A = K_r - p_r, B = K_r v_r^nu and
/// C = c_vr/theta_r are derived; C <= 0 is permitted only so that
/// negative-stability fixtures can be built.
struct TaitParams {
    double nu = 1.0;
    double u_r = 0.0;
    double v_r = 1.0;
    double s_r = 0.0;
    double theta_r = 1.0;
    double p_r = 0.0;
    double K_r = 1.0;    // modulus of compression at the reference state
    double D = 0.0;      // saturation-curve slope, supplied raw by config
    double c_vr = 1.0;   // reference isochoric heat capacity, sign free

    double A() const { return K_r - p_r; }
    double B() const { return K_r * std::pow(v_r, nu); }
    double C() const { return c_vr / theta_r; }

    void validate() const {
        if (!(nu >= 1.0)) throw ConfigError("Tait exponent nu must be >= 1");
        if (!(K_r > 0.0 && v_r > 0.0 && theta_r > 0.0))
            throw ConfigError("Tait parameters need K_r > 0, v_r > 0, theta_r > 0");
        if (c_vr == 0.0) throw ConfigError("Tait c_vr must be nonzero");
    }
};

class TaitEos {
public:
    explicit TaitEos(TaitParams params) : params_(params) { params_.validate(); }

    const TaitParams& params() const { return params_; }

    /// Volume potential: ln(v_r/v) for nu = 1, else the power-law branch;
    /// the two branches join continuously as nu -> 1.
    template <typename T>
    T volume_potential(const T& v) const {
        using std::log;
        using std::pow;
        if (params_.nu == 1.0) return log(params_.v_r / v);
        return (1.0 / (1.0 - params_.nu)) *
               (std::pow(params_.v_r, 1.0 - params_.nu) - pow(v, 1.0 - params_.nu));
    }

    /// Specific internal energy u(v,s). The mixed reference term is
    /// theta_r (s - s_r): this is the variant whose pressure is
    /// consistent with the thermal form p = pbar(theta) + K_r[(v_r/v)^nu - 1]
    /// and which reduces to p = p_r, theta = theta_r at the reference state.
    template <typename T>
    T internal_energy_vs(const T& v, const T& s) const {
        const TaitParams& q = params_;
        const T x = (s - q.s_r) - q.D * (v - q.v_r);
        return q.A() * (v - q.v_r) + q.B() * volume_potential(v) +
               x * x / (2.0 * q.C()) + q.theta_r * (s - q.s_r) +
               q.C() * q.theta_r * q.theta_r + q.u_r;
    }

    template <typename T>
    T pressure_vs(const T& v, const T& s) const {
        using std::pow;
        const TaitParams& q = params_;
        const T x = (s - q.s_r) - q.D * (v - q.v_r);
        return (q.D / q.C()) * x - q.A() + q.B() * pow(v, -q.nu);
    }

    template <typename T>
    T temperature_vs(const T& v, const T& s) const {
        const TaitParams& q = params_;
        const T x = (s - q.s_r) - q.D * (v - q.v_r);
        return x / q.C() + q.theta_r;
    }

    /// Thermal equation of state p(v,theta) = pbar(theta) + K_r[(v_r/v)^nu - 1]
    /// with pbar(theta) = D (theta - theta_r) + p_r.
    template <typename T>
    T pressure_vtheta(const T& v, const T& theta) const {
        using std::pow;
        const TaitParams& q = params_;
        return q.D * (theta - q.theta_r) + q.p_r +
               q.K_r * (std::pow(q.v_r, q.nu) * pow(v, -q.nu) - 1.0);
    }

    /// Caloric equation of state u(v,theta).
    template <typename T>
    T internal_energy_vtheta(const T& v, const T& theta) const {
        const TaitParams& q = params_;
        return (q.A() + q.D * q.theta_r) * (v - q.v_r) + q.B() * volume_potential(v) +
               (q.C() / 2.0) * (theta * theta + q.theta_r * q.theta_r) + q.u_r;
    }

    double entropy_vtheta(double v, double theta) const {
        const TaitParams& q = params_;
        return q.s_r + q.C() * (theta - q.theta_r) + q.D * (v - q.v_r);
    }

    /// theta(v, e) from the caloric form; needs C > 0.
    template <typename T>
    T temperature_ve(const T& v, const T& e) const {
        using std::sqrt;
        const TaitParams& q = params_;
        const T rhs = (2.0 / q.C()) * (e - (q.A() + q.D * q.theta_r) * (v - q.v_r) -
                                       q.B() * volume_potential(v) - q.u_r) -
                      q.theta_r * q.theta_r;
        return sqrt(rhs);
    }

    template <typename T>
    T pressure_ve(const T& v, const T& e) const {
        return pressure_vtheta(v, temperature_ve(v, e));
    }

    /// Admissibility: p > 0 is enforced (the thermal form restricts the
    /// state space); theta > 0 likewise.
    ScalarField u_vs_field(Eigen::VectorXd lo, Eigen::VectorXd hi) const {
        auto self = *this;
        DomainSpec dom(std::move(lo), std::move(hi), [self](const Eigen::VectorXd& x) {
            if (!(x(0) > 0.0)) return false;
            return self.pressure_vs(x(0), x(1)) > 0.0 &&
                   self.temperature_vs(x(0), x(1)) > 0.0;
        });
        return ScalarField::from_expression(
            "tait u(v,s)", {"v [m^3/kg]", "s [J/(kg K)]"}, std::move(dom),
            [self](const std::vector<Dual2>& x) {
                return self.internal_energy_vs(x[0], x[1]);
            });
    }

    ScalarField u_vtheta_field(Eigen::VectorXd lo, Eigen::VectorXd hi) const {
        auto self = *this;
        DomainSpec dom(std::move(lo), std::move(hi), [self](const Eigen::VectorXd& x) {
            return x(0) > 0.0 && x(1) > 0.0 && self.pressure_vtheta(x(0), x(1)) > 0.0;
        });
        return ScalarField::from_expression(
            "tait u(v,theta)", {"v [m^3/kg]", "theta [K]"}, std::move(dom),
            [self](const std::vector<Dual2>& x) {
                return self.internal_energy_vtheta(x[0], x[1]);
            });
    }

    ScalarField p_vtheta_field(Eigen::VectorXd lo, Eigen::VectorXd hi) const {
        auto self = *this;
        DomainSpec dom(std::move(lo), std::move(hi), [self](const Eigen::VectorXd& x) {
            return x(0) > 0.0 && x(1) > 0.0;
        });
        return ScalarField::from_expression(
            "tait p(v,theta)", {"v [m^3/kg]", "theta [K]"}, std::move(dom),
            [self](const std::vector<Dual2>& x) {
                return self.pressure_vtheta(x[0], x[1]);
            });
    }

private:
    TaitParams params_;
};

// ---------------------------------------------------------------------------
// Runtime-selected model adapter
// ---------------------------------------------------------------------------

/// Type-erased view of one equation of state: the fundamental field (when
/// the family provides one), the measurable-variable fields, and the
/// closed-form maps the cross-checks and flux constructions need.
struct EosModel {
    std::string family;

    std::optional<ScalarField> u_vs;
    ScalarField u_vtheta;
    ScalarField p_vtheta;

    std::function<double(double, double)> pressure_vs;
    std::function<double(double, double)> temperature_vs;
    std::function<double(double, double)> entropy_vtheta;
    std::function<double(double, double)> energy_vtheta;
    std::function<Dual2(const Dual2&, const Dual2&)> pressure_vs_dual;
    std::function<Dual2(const Dual2&, const Dual2&)> temperature_vs_dual;
    std::function<Dual2(const Dual2&, const Dual2&)> pressure_ve_dual;

    bool has_fundamental() const { return u_vs.has_value(); }
};

struct EosBoxes {
    Eigen::VectorXd vs_lo, vs_hi;
    Eigen::VectorXd vtheta_lo, vtheta_hi;
};

inline EosModel make_model(const IdealPolytropicGas& gas, const EosBoxes& boxes) {
    EosModel m;
    m.family = "polytropic";
    m.u_vs = gas.u_vs_field(boxes.vs_lo, boxes.vs_hi);
    m.u_vtheta = gas.u_vtheta_field(boxes.vtheta_lo, boxes.vtheta_hi);
    m.p_vtheta = gas.p_vtheta_field(boxes.vtheta_lo, boxes.vtheta_hi);
    m.pressure_vs = [gas](double v, double s) { return gas.pressure_vs(v, s); };
    m.temperature_vs = [gas](double v, double s) { return gas.temperature_vs(v, s); };
    m.entropy_vtheta = [gas](double v, double t) { return gas.entropy_vtheta(v, t); };
    m.energy_vtheta = [gas](double v, double t) {
        return gas.internal_energy_vtheta(v, t);
    };
    m.pressure_vs_dual = [gas](const Dual2& v, const Dual2& s) {
        return gas.pressure_vs(v, s);
    };
    m.temperature_vs_dual = [gas](const Dual2& v, const Dual2& s) {
        return gas.temperature_vs(v, s);
    };
    m.pressure_ve_dual = [gas](const Dual2& v, const Dual2& e) {
        return gas.pressure_ve(v, e);
    };
    return m;
}

inline EosModel make_model(const TaitEos& eos, const EosBoxes& boxes) {
    EosModel m;
    m.family = "tait";
    m.u_vs = eos.u_vs_field(boxes.vs_lo, boxes.vs_hi);
    m.u_vtheta = eos.u_vtheta_field(boxes.vtheta_lo, boxes.vtheta_hi);
    m.p_vtheta = eos.p_vtheta_field(boxes.vtheta_lo, boxes.vtheta_hi);
    m.pressure_vs = [eos](double v, double s) { return eos.pressure_vs(v, s); };
    m.temperature_vs = [eos](double v, double s) { return eos.temperature_vs(v, s); };
    m.entropy_vtheta = [eos](double v, double t) { return eos.entropy_vtheta(v, t); };
    m.energy_vtheta = [eos](double v, double t) {
        return eos.internal_energy_vtheta(v, t);
    };
    m.pressure_vs_dual = [eos](const Dual2& v, const Dual2& s) {
        return eos.pressure_vs(v, s);
    };
    m.temperature_vs_dual = [eos](const Dual2& v, const Dual2& s) {
        return eos.temperature_vs(v, s);
    };
    m.pressure_ve_dual = [eos](const Dual2& v, const Dual2& e) {
        return eos.pressure_ve(v, e);
    };
    return m;
}

inline EosModel make_model(const VanDerWaalsGas& gas, const EosBoxes& boxes) {
    EosModel m;
    m.family = "van-der-waals";
    m.u_vtheta = gas.u_vtheta_field(boxes.vtheta_lo, boxes.vtheta_hi);
    m.p_vtheta = gas.p_vtheta_field(boxes.vtheta_lo, boxes.vtheta_hi);
    m.entropy_vtheta = {};
    m.energy_vtheta = [gas](double v, double t) {
        return gas.internal_energy_vtheta(v, t);
    };
    return m;
}

} // namespace thermoconvex
