#pragma once

// Basis-function dictionaries for κ̂(y) = Σ a_i φ_i(y). Every function carries
// a closed-form Lipschitz constant with respect to the ∞-norm on y, so the
// Lipschitz constant of any learned combination can be bounded by Σ |a_i| L_i.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ctrlid/core_types.hpp"

namespace ctrlid::basis {

enum class Family { gaussian, polynomial, sigmoid, trigonometric };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

// exp(-width * ||y - center||_2^2)
struct Gaussian {
  Vector center;
  double width = 1.0;
};

// prod_j y_j^degrees[j]
struct Monomial {
  std::vector<unsigned> degrees;
};

// 1 / (1 + exp(-(weights . y + bias)))
struct Sigmoid {
  Vector weights;
  double bias = 0.0;
};

// cos(frequencies . y + phase)
struct Cosine {
  Vector frequencies;
  double phase = 0.0;
};

using Function = std::variant<Gaussian, Monomial, Sigmoid, Cosine>;

class Dictionary {
 public:
  Dictionary(Family family, Box domain, std::vector<Function> functions);

  Family family() const { return family_; }
  std::size_t size() const { return functions_.size(); }
  std::size_t dim() const { return domain_.dim(); }
  const Box& domain() const { return domain_; }
  const Function& function(std::size_t i) const { return functions_[i]; }
  double lipschitz(std::size_t i) const { return lipschitz_[i]; }
  const Vector& lipschitz_constants() const { return lipschitz_; }

  // φ_i(y) without a domain check.
  double value(std::size_t i, std::span<const double> y) const;

  // (φ_1(y), ..., φ_M(y)); y must lie in the domain within kDomainTol.
  Vector evaluate_row(std::span<const double> y) const;
  void evaluate_row(std::span<const double> y, std::span<double> out) const;

  // Same functions in a new order: result.function(i) = function(order[i]).
  Dictionary permuted(std::span<const std::size_t> order) const;

  static constexpr double kDomainTol = 1e-9;

 private:
  Family family_;
  Box domain_;
  std::vector<Function> functions_;
  Vector lipschitz_;
};

// Closed-form ∞-norm Lipschitz constant of one function over a box.
double lipschitz_bound(const Function& f, const Box& domain);

// One Gaussian per sample, centred at ỹ(k), with a shared width. The domain
// defaults to the bounding box of the samples.
Dictionary gaussian_from_data(const Dataset& d, double width,
                              std::optional<Box> domain = std::nullopt);

// All monomials of total degree <= max_degree, graded by degree, then
// lexicographically by exponent vector. For n_y = 1 this is {1, y, ..., y^d}.
Dictionary polynomial(const Box& domain, unsigned max_degree);

// 1-D sigmoids σ(slope (y - c)) for each centre c.
Dictionary sigmoids(const Box& domain, std::span<const double> centers, double slope);

// 1-D Fourier family on the domain: 1, cos(kωy), sin(kωy) for k = 1..harmonics,
// with ω = 2π / (hi - lo).
Dictionary trigonometric(const Box& domain, unsigned harmonics);

// Text format, one key/value per line after a versioned header:
//
//   ctrlid-dictionary 1
//   family = gaussian | polynomial | sigmoid | trigonometric
//   dim = <n_y>
//   domain_lower = <n_y numbers>
//   domain_upper = <n_y numbers>
//   size = <M>
//   phi = <parameters of function 0>
//   ...                                  (M phi lines in order)
//
// phi parameters by family: gaussian "width c_1 .. c_n", polynomial
// "d_1 .. d_n", sigmoid "bias w_1 .. w_n", trigonometric "phase w_1 .. w_n".
// Numbers are written with 17 significant digits.
void write_dictionary(std::ostream& os, const Dictionary& dict);
Dictionary read_dictionary(std::istream& is);

enum class Verdict { accept, reject_not_sparse, reject_large_alpha };

std::string to_string(Verdict v);

struct DiagnosisThresholds {
  double alpha_small = 1.2;
  double sparsity_max = 0.3;
};

struct Diagnosis {
  Verdict verdict = Verdict::accept;
  double alpha = 1.0;
  double sparsity_ratio = 0.0;
};

// Accept/reject logic for trying a basis family: a small α with a sparse
// coefficient vector accepts; otherwise the family is rejected with the reason.
Diagnosis diagnose(double alpha, std::size_t support_size, std::size_t dictionary_size,
                   const DiagnosisThresholds& thresholds = {});

}  // namespace ctrlid::basis
