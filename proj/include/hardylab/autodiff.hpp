#pragma once

/**
 * @file autodiff.hpp
 * @brief Forward-mode dual numbers over complex scalars.
 *
 * A Dual<M> carries a complex value and M complex tangents. Seeding tangent j
 * with e_j and evaluating a composed expression yields the j-th partial
 * derivative exactly (up to rounding).
 *
 * @code
 * auto x = hlab::Dual<1>::variable({3.0, 0.0}, 0);
 * auto y = x * x;            // y.value() == 9, y.tangent(0) == 6
 * @endcode
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace hlab {

using complex = std::complex<double>;

/// Raised when a primitive is evaluated outside its domain (log of a
/// nonpositive real, a real-only primitive fed a complex argument, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

template <std::size_t M>
class Dual {
public:
    using tangent_array = std::array<complex, M>;

    constexpr Dual() = default;
    constexpr Dual(complex v) : value_(v) {}           // NOLINT(implicit)
    constexpr Dual(double v) : value_(v, 0.0) {}        // NOLINT(implicit)
    constexpr Dual(complex v, const tangent_array& t) : value_(v), tangents_(t) {}

    /// Independent variable seeded in direction `slot`.
    static Dual variable(complex v, std::size_t slot) {
        Dual d(v);
        d.tangents_.at(slot) = complex(1.0, 0.0);
        return d;
    }

    /// Variable with an arbitrary seed vector (directional derivative).
    static Dual seeded(complex v, const tangent_array& seed) { return Dual(v, seed); }

    [[nodiscard]] constexpr complex value() const { return value_; }
    [[nodiscard]] constexpr complex tangent(std::size_t j) const { return tangents_[j]; }
    [[nodiscard]] constexpr const tangent_array& tangents() const { return tangents_; }
    static constexpr std::size_t size() { return M; }

    /// True when value and every tangent are exactly zero.
    [[nodiscard]] bool is_exact_zero() const {
        if (value_ != complex(0.0, 0.0)) return false;
        for (const auto& t : tangents_)
            if (t != complex(0.0, 0.0)) return false;
        return true;
    }

    /// Chain rule: returns g(value) with tangents scaled by g'(value).
    [[nodiscard]] Dual chain(complex g, complex dg) const {
        Dual out(g);
        for (std::size_t j = 0; j < M; ++j) out.tangents_[j] = dg * tangents_[j];
        return out;
    }

    Dual& operator+=(const Dual& o) {
        value_ += o.value_;
        for (std::size_t j = 0; j < M; ++j) tangents_[j] += o.tangents_[j];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        value_ -= o.value_;
        for (std::size_t j = 0; j < M; ++j) tangents_[j] -= o.tangents_[j];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (std::size_t j = 0; j < M; ++j)
            tangents_[j] = value_ * o.tangents_[j] + o.value_ * tangents_[j];
        value_ *= o.value_;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        const complex inv = 1.0 / o.value_;
        const complex q = value_ * inv;
        for (std::size_t j = 0; j < M; ++j)
            tangents_[j] = (tangents_[j] - q * o.tangents_[j]) * inv;
        value_ = q;
        return *this;
    }

    friend Dual operator+(Dual a, const Dual& b) { return a += b; }
    friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
    friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
    friend Dual operator/(Dual a, const Dual& b) { return a /= b; }
    friend Dual operator-(const Dual& a) { return a.chain(-a.value_, complex(-1.0, 0.0)); }

private:
    complex value_{0.0, 0.0};
    tangent_array tangents_{};
};

// Scalar traits so the expression evaluator can treat complex and Dual alike.

template <class T>
struct scalar_traits {
    static constexpr bool enabled = false;
};

template <>
struct scalar_traits<complex> {
    static constexpr bool enabled = true;
    static complex value(const complex& z) { return z; }
    static bool is_exact_zero(const complex& z) { return z == complex(0.0, 0.0); }
    static complex chain(const complex&, complex g, complex) { return g; }
};

template <std::size_t M>
struct scalar_traits<Dual<M>> {
    static constexpr bool enabled = true;
    static complex value(const Dual<M>& z) { return z.value(); }
    static bool is_exact_zero(const Dual<M>& z) { return z.is_exact_zero(); }
    static Dual<M> chain(const Dual<M>& z, complex g, complex dg) { return z.chain(g, dg); }
};

/// complex or Dual<M>: the scalars every primitive accepts.
template <class T>
concept AdScalar = scalar_traits<T>::enabled;

namespace detail {

inline double require_real(complex z, const char* what) {
    if (std::abs(z.imag()) > 1e-12 * std::max(1.0, std::abs(z.real())))
        throw DomainError(std::string(what) + ": argument must be real");
    return z.real();
}

/// exp(-1/t) for t > 0, else 0; with derivative.
inline void psi(double t, double& v, double& dv) {
    if (t <= 0.0) {
        v = 0.0;
        dv = 0.0;
        return;
    }
    v = std::exp(-1.0 / t);
    dv = v / (t * t);
}

}  // namespace detail

// Primitive set. Each is defined once on the value and propagated through
// chain(); the same code serves plain complex evaluation.

template <AdScalar T>
T exp(const T& z) {
    const complex e = std::exp(scalar_traits<T>::value(z));
    return scalar_traits<T>::chain(z, e, e);
}

template <AdScalar T>
T log(const T& z) {
    const complex v = scalar_traits<T>::value(z);
    if (v.imag() == 0.0 && v.real() <= 0.0) throw DomainError("log: nonpositive argument");
    return scalar_traits<T>::chain(z, std::log(v), 1.0 / v);
}

template <AdScalar T>
T sin(const T& z) {
    const complex v = scalar_traits<T>::value(z);
    return scalar_traits<T>::chain(z, std::sin(v), std::cos(v));
}

template <AdScalar T>
T cos(const T& z) {
    const complex v = scalar_traits<T>::value(z);
    return scalar_traits<T>::chain(z, std::cos(v), -std::sin(v));
}

/// z^a for real a. Real nonnegative bases stay on the real branch; a zero
/// base is only allowed for a >= 1 (otherwise the derivative is unbounded).
template <AdScalar T>
T pow(const T& z, double a) {
    const complex v = scalar_traits<T>::value(z);
    if (v.imag() == 0.0 && v.real() >= 0.0) {
        const double x = v.real();
        if (x == 0.0) {
            if (a == 0.0) return scalar_traits<T>::chain(z, 1.0, 0.0);
            if (a < 1.0) throw DomainError("pow: zero base with exponent < 1");
            return scalar_traits<T>::chain(z, 0.0, a == 1.0 ? 1.0 : 0.0);
        }
        const double xa = std::pow(x, a);
        return scalar_traits<T>::chain(z, xa, a * xa / x);
    }
    if (v == complex(0.0, 0.0)) throw DomainError("pow: zero base");
    const complex za = std::pow(v, a);
    return scalar_traits<T>::chain(z, za, a * za / v);
}

/// Integer power by repeated multiplication; total on all finite inputs
/// for m >= 0.
template <AdScalar T>
T powi(const T& z, int m) {
    if (m < 0) return T(complex(1.0, 0.0)) / powi(z, -m);
    T result(complex(1.0, 0.0));
    T base = z;
    while (m > 0) {
        if (m & 1) result = result * base;
        m >>= 1;
        if (m > 0) base = base * base;
    }
    return result;
}

/// Compact bump exp(-1/(1-s^2)) on |s| < 1, zero elsewhere. Real argument.
template <AdScalar T>
T bump(const T& z) {
    const double s = detail::require_real(scalar_traits<T>::value(z), "bump");
    const double d = 1.0 - s * s;
    if (d <= 0.0) return scalar_traits<T>::chain(z, 0.0, 0.0);
    const double b = std::exp(-1.0 / d);
    return scalar_traits<T>::chain(z, b, b * (-2.0 * s / (d * d)));
}

/// Smooth step: 0 for t <= 0, 1 for t >= 1, C-infinity in between.
template <AdScalar T>
T smooth_step(const T& z) {
    const double t = detail::require_real(scalar_traits<T>::value(z), "smooth_step");
    if (t <= 0.0) return scalar_traits<T>::chain(z, 0.0, 0.0);
    if (t >= 1.0) return scalar_traits<T>::chain(z, 1.0, 0.0);
    double a = 0.0, da = 0.0, b = 0.0, db = 0.0;
    detail::psi(t, a, da);
    detail::psi(1.0 - t, b, db);
    const double den = a + b;
    const double v = a / den;
    const double dv = (da * b + a * db) / (den * den);
    return scalar_traits<T>::chain(z, v, dv);
}

/// Gradient of a callable taking std::array<Dual<N>, N> at point x.
template <std::size_t N, class F>
std::array<complex, N> gradient(F&& f, const std::array<double, N>& x) {
    std::array<Dual<N>, N> vars;
    for (std::size_t j = 0; j < N; ++j) vars[j] = Dual<N>::variable(complex(x[j], 0.0), j);
    const Dual<N> y = f(vars);
    return y.tangents();
}

}  // namespace hlab
