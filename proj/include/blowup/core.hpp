#ifndef BLOWUP_CORE_HPP
#define BLOWUP_CORE_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace blowup {

struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

/// Reaction term f of u_t = Δu + f(u): either e^u or u^p (p > 1, u ≥ 0).
class Nonlinearity {
 public:
  enum class Kind { Exponential, Power };

  static Nonlinearity exponential() { return Nonlinearity(Kind::Exponential, 0.0); }

  static Nonlinearity power(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) {
      throw InvalidParameter("power nonlinearity requires p > 1");
    }
    return Nonlinearity(Kind::Power, p);
  }

  Kind kind() const { return kind_; }
  bool is_exponential() const { return kind_ == Kind::Exponential; }
  bool is_power() const { return kind_ == Kind::Power; }

  /// Exponent of the power law; NaN for the exponential case.
  double p() const { return is_power() ? p_ : std::nan(""); }

  double f(double u) const {
    if (is_exponential()) return std::exp(u);
    return u > 0.0 ? std::pow(u, p_) : 0.0;
  }

  double f_prime(double u) const {
    if (is_exponential()) return std::exp(u);
    return u > 0.0 ? p_ * std::pow(u, p_ - 1.0) : 0.0;
  }

  /// Constant self-similar solution level (1/(p-1))^{1/(p-1)}.
  double kappa() const {
    if (!is_power()) throw InvalidParameter("kappa is defined only for the power nonlinearity");
    return std::pow(1.0 / (p_ - 1.0), 1.0 / (p_ - 1.0));
  }

  /// Exponent m in |y|^{-m}: 2/(p-1) for the power case.
  double tail_exponent() const {
    if (!is_power()) throw InvalidParameter("tail exponent is defined only for the power nonlinearity");
    return 2.0 / (p_ - 1.0);
  }

  /// Reaction term of the stationary profile equation:
  /// e^φ - 1, or -φ/(p-1) + |φ|^{p-1}φ.
  double profile_reaction(double phi) const {
    if (is_exponential()) return std::expm1(phi);
    return -phi / (p_ - 1.0) + std::copysign(std::pow(std::fabs(phi), p_), phi);
  }

  double profile_reaction_prime(double phi) const {
    if (is_exponential()) return std::exp(phi);
    return -1.0 / (p_ - 1.0) + p_ * std::pow(std::fabs(phi), p_ - 1.0);
  }

  std::string name() const {
    return is_exponential() ? std::string("exponential") : "power(" + std::to_string(p_) + ")";
  }

  bool operator==(const Nonlinearity& other) const {
    return kind_ == other.kind_ && (is_exponential() || p_ == other.p_);
  }

 private:
  Nonlinearity(Kind k, double p) : kind_(k), p_(p) {}

  Kind kind_;
  double p_;
};

struct DomainSpec {
  int N = 3;
  double R = 1.0;

  void validate() const {
    if (N < 1) throw InvalidParameter("dimension N must be >= 1");
    if (!(R > 0.0)) throw InvalidParameter("ball radius R must be > 0");
  }

  bool supercritical() const { return N >= 3 && N <= 9; }
};

/// L^{p-1} = (2/(p-1)) (N - 2 - 2/(p-1)); the singular steady state is L r^{-2/(p-1)}.
inline double singular_power_amplitude_pow(double p, int N) {
  const double m = 2.0 / (p - 1.0);
  return m * (N - 2.0 - m);
}

inline double singular_power_amplitude(double p, int N) {
  const double lp = singular_power_amplitude_pow(p, N);
  if (!(lp > 0.0)) throw InvalidParameter("L^{p-1} must be positive (need N - 2 > 2/(p-1))");
  return std::pow(lp, 1.0 / (p - 1.0));
}

/// Sobolev exponent (N+2)/(N-2); infinite for N <= 2.
inline double sobolev_exponent(int N) {
  return N > 2 ? (N + 2.0) / (N - 2.0) : INFINITY;
}

// Similarity variables. Time is carried as tau = T - t wherever possible.

struct SimilarityPoint {
  double y;
  double s;
  double w;
};

struct PhysicalPoint {
  double r;
  double t;
  double u;
  double tau;  // T - t, exact from s
};

inline SimilarityPoint to_similarity_tau(double r, double tau, double u_value, const Nonlinearity& nl) {
  if (!(tau > 0.0)) throw DomainError("post-blow-up time");
  if (!(r >= 0.0)) throw InvalidParameter("radius must be >= 0");
  const double w = nl.is_exponential() ? std::log(tau) + u_value
                                       : std::pow(tau, 1.0 / (nl.p() - 1.0)) * u_value;
  return {r / std::sqrt(tau), -std::log(tau), w};
}

inline SimilarityPoint to_similarity(double r, double t, double T, double u_value, const Nonlinearity& nl) {
  if (!(T > 0.0)) throw InvalidParameter("blow-up time T must be > 0");
  if (!(t < T)) throw DomainError("post-blow-up time");
  if (t < 0.0) throw DomainError("time must be >= 0");
  return to_similarity_tau(r, T - t, u_value, nl);
}

inline PhysicalPoint from_similarity(double y, double s, double w, double T, const Nonlinearity& nl) {
  if (!std::isfinite(y) || !std::isfinite(s) || !std::isfinite(w) || !std::isfinite(T)) {
    throw InvalidParameter("non-finite similarity coordinates");
  }
  const double tau = std::exp(-s);
  const double u = nl.is_exponential() ? w + s : w * std::exp(s / (nl.p() - 1.0));
  return {y * std::sqrt(tau), T - tau, u, tau};
}

/// λ(t) = |log(T-t)| sqrt(T-t) for m = 2, (T-t)^{1/m} for m > 2.
inline double refined_scale_tau(double tau, int m) {
  if (m < 2) throw InvalidParameter("refined scale needs m >= 2");
  if (!(tau > 0.0)) throw DomainError("post-blow-up time");
  if (m == 2) return std::fabs(std::log(tau)) * std::sqrt(tau);
  return std::pow(tau, 1.0 / m);
}

inline double refined_scale(double t, double T, int m) {
  if (m < 2) throw InvalidParameter("refined scale needs m >= 2");
  if (!(t > 0.0)) throw DomainError("refined scale needs t > 0");
  if (!(t < T)) throw DomainError("post-blow-up time");
  return refined_scale_tau(T - t, m);
}

}  // namespace blowup

#endif  // BLOWUP_CORE_HPP
