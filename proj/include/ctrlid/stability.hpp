#pragma once

// Finite-gain ℓ∞ stability bounds for the loop closed by a reference
// controller κ, by a learned controller κ̂, and for the deviation between the
// two loops. All bounds are pure arithmetic on Lipschitz constants and
// offsets; they are stress-tested in simulation rather than proved here.

#include <cstddef>
#include <iosfwd>
#include <string>

namespace ctrlid::stability {

// Bound on ||y(t)||_∞ for the reference loop (contraction factor γ_{g,y}):
//   γ_{g,e}/(1-γ_{g,y}) ||e_s|| + γ_{g,y}^t ||y(0)|| + ||g_0||/(1-γ_{g,y}).
// Raises CertificateError unless 0 <= γ_{g,y} < 1.
double baseline_bound(double gamma_gy, double gamma_ge, double g0_norm, double es_norm, double y0_norm,
                      std::size_t t);

struct CertificateInputs {
  double gamma_f = 0.0;
  double gamma_gy = 0.0;
  double gamma_ge = 0.0;
  double gamma_delta = 0.0;  // Lipschitz constant of κ - κ̂ being certified
  double gamma_khat = 0.0;   // Lipschitz constant of κ̂
  double delta0_abs = 0.0;   // |κ(0) - κ̂(0)|
  double g0_norm = 0.0;      // ||g(0, 0)||_∞ of the reference loop
  double epsilon_y = 0.0;    // output measurement noise bound
  std::string delta0_source = "user";  // "reference", "user" or "residual-bound"
};

struct StabilityCertificate {
  CertificateInputs in;
  double gamma = 0.0;  // γ_f γ_Δ + γ_{g,y}
  bool certified = false;

  // Margin on γ_Δ: (1 - γ_{g,y}) / γ_f (infinite when γ_f = 0).
  double gamma_delta_limit() const;
};

// Raises ParameterError on negative or non-finite inputs.
StabilityCertificate certify(const CertificateInputs& in);

// Bound on ||y(t)||_∞ for the loop closed by κ̂ with noisy feedback:
//   γ_{g,e}/(1-γ) ||e_s|| + γ^t ||y(0)|| + (||g_0|| + γ_f |Δ_0| + γ_f γ_κ̂ ε_y)/(1-γ).
double learned_loop_bound(const StabilityCertificate& c, double es_norm, double y0_norm, std::size_t t);

// Bound on ||ŷ(t) - y(t)||_∞ between the κ̂ loop and the κ loop:
//   γ_{g,e}/(1-γ) ||e_s|| + γ^t ||ξ(0)|| + γ_f γ_Δ/(1-γ) γ_{g,y}^t ||y(0)|| + δ
// with δ the offset term of learned_loop_bound.
double deviation_bound(const StabilityCertificate& c, double xi0_norm, double y0_norm, double es_norm,
                       std::size_t t);

void write_certificate(std::ostream& os, const StabilityCertificate& c);

}  // namespace ctrlid::stability
