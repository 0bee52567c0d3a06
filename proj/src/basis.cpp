#include "ctrlid/basis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ctrlid/errors.hpp"
#include "ctrlid/text_format.hpp"

namespace ctrlid::basis {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t function_dim(const Function& f) {
  return std::visit(Overloaded{[](const Gaussian& g) { return g.center.size(); },
                               [](const Monomial& m) { return m.degrees.size(); },
                               [](const Sigmoid& s) { return s.weights.size(); },
                               [](const Cosine& c) { return c.frequencies.size(); }},
                    f);
}

Family family_of(const Function& f) {
  return std::visit(Overloaded{[](const Gaussian&) { return Family::gaussian; },
                               [](const Monomial&) { return Family::polynomial; },
                               [](const Sigmoid&) { return Family::sigmoid; },
                               [](const Cosine&) { return Family::trigonometric; }},
                    f);
}

double l1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::polynomial: return "polynomial";
    case Family::sigmoid: return "sigmoid";
    case Family::trigonometric: return "trigonometric";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "polynomial") return Family::polynomial;
  if (s == "sigmoid") return Family::sigmoid;
  if (s == "trigonometric") return Family::trigonometric;
  throw ParameterError("unknown basis family '" + s + "'");
}

double lipschitz_bound(const Function& f, const Box& domain) {
  return std::visit(
      Overloaded{
          // |∇φ|_1 = 2w φ |y-c|_1 <= 2w sqrt(n) r e^{-w r^2}, maximal at r^2 = 1/(2w).
          [&](const Gaussian& g) {
            const double n = static_cast<double>(g.center.size());
            return std::sqrt(2.0 * g.width * n) * std::exp(-0.5);
          },
          [&](const Monomial& m) {
            double total = 0.0;
            for (std::size_t j = 0; j < m.degrees.size(); ++j) {
              if (m.degrees[j] == 0) continue;
              double term = static_cast<double>(m.degrees[j]);
              for (std::size_t i = 0; i < m.degrees.size(); ++i) {
                const double r = std::max(std::abs(domain.lower[i]), std::abs(domain.upper[i]));
                const unsigned p = (i == j) ? m.degrees[i] - 1 : m.degrees[i];
                term *= std::pow(r, static_cast<double>(p));
              }
              total += term;
            }
            return total;
          },
          [&](const Sigmoid& s) { return 0.25 * l1(s.weights); },
          [&](const Cosine& c) { return l1(c.frequencies); }},
      f);
}

Dictionary::Dictionary(Family family, Box domain, std::vector<Function> functions)
    : family_(family), domain_(std::move(domain)), functions_(std::move(functions)) {
  if (functions_.empty()) throw ParameterError("dictionary needs at least one function");
  if (domain_.dim() == 0 || domain_.upper.size() != domain_.dim()) {
    throw ParameterError("dictionary domain must be a non-empty box");
  }
  for (std::size_t i = 0; i < domain_.dim(); ++i) {
    if (!(domain_.lower[i] <= domain_.upper[i]) || !std::isfinite(domain_.lower[i]) ||
        !std::isfinite(domain_.upper[i])) {
      throw ParameterError("dictionary domain bounds must be finite with lower <= upper");
    }
  }
  lipschitz_.reserve(functions_.size());
  for (const Function& f : functions_) {
    if (family_of(f) != family_) throw ParameterError("function does not belong to family " + to_string(family_));
    if (function_dim(f) != domain_.dim()) throw ParameterError("function dimension does not match domain");
    if (const auto* g = std::get_if<Gaussian>(&f); g && !(g->width > 0.0)) {
      throw ParameterError("gaussian width must be positive");
    }
    lipschitz_.push_back(lipschitz_bound(f, domain_));
  }
}

double Dictionary::value(std::size_t i, std::span<const double> y) const {
  return std::visit(Overloaded{[&](const Gaussian& g) {
                                 double r2 = 0.0;
                                 for (std::size_t j = 0; j < y.size(); ++j) {
                                   const double d = y[j] - g.center[j];
                                   r2 += d * d;
                                 }
                                 return std::exp(-g.width * r2);
                               },
                               [&](const Monomial& m) {
                                 double v = 1.0;
                                 for (std::size_t j = 0; j < y.size(); ++j) {
                                   for (unsigned p = 0; p < m.degrees[j]; ++p) v *= y[j];
                                 }
                                 return v;
                               },
                               [&](const Sigmoid& s) {
                                 double arg = s.bias;
                                 for (std::size_t j = 0; j < y.size(); ++j) arg += s.weights[j] * y[j];
                                 return 1.0 / (1.0 + std::exp(-arg));
                               },
                               [&](const Cosine& c) {
                                 double arg = c.phase;
                                 for (std::size_t j = 0; j < y.size(); ++j) arg += c.frequencies[j] * y[j];
                                 return std::cos(arg);
                               }},
                    functions_[i]);
}

void Dictionary::evaluate_row(std::span<const double> y, std::span<double> out) const {
  if (y.size() != dim()) throw DomainError("point has wrong dimension for dictionary");
  if (auto bad = domain_.first_violation(y, kDomainTol)) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "component " << *bad << " = " << y[*bad] << " outside ["
        << domain_.lower[*bad] << ", " << domain_.upper[*bad] << "]";
    throw DomainError(msg.str());
  }
  for (std::size_t i = 0; i < functions_.size(); ++i) out[i] = value(i, y);
}

Vector Dictionary::evaluate_row(std::span<const double> y) const {
  Vector out(size());
  evaluate_row(y, out);
  return out;
}

Dictionary Dictionary::permuted(std::span<const std::size_t> order) const {
  std::vector<Function> fs;
  fs.reserve(order.size());
  for (std::size_t i : order) fs.push_back(functions_.at(i));
  return Dictionary(family_, domain_, std::move(fs));
}

Dictionary gaussian_from_data(const Dataset& d, double width, std::optional<Box> domain) {
  if (!(width > 0.0)) throw ParameterError("gaussian width must be positive");
  if (d.samples.empty()) throw DataError("cannot build a dictionary from an empty dataset");
  Box dom;
  if (domain) {
    dom = *domain;
  } else {
    dom = Box{d.samples.front().y, d.samples.front().y};
    for (const Sample& s : d.samples) {
      for (std::size_t j = 0; j < d.n_y; ++j) {
        dom.lower[j] = std::min(dom.lower[j], s.y.at(j));
        dom.upper[j] = std::max(dom.upper[j], s.y.at(j));
      }
    }
  }
  std::vector<Function> fs;
  fs.reserve(d.samples.size());
  for (const Sample& s : d.samples) fs.emplace_back(Gaussian{s.y, width});
  return Dictionary(Family::gaussian, std::move(dom), std::move(fs));
}

Dictionary polynomial(const Box& domain, unsigned max_degree) {
  const std::size_t n = domain.dim();
  std::vector<Function> fs;
  for (unsigned total = 0; total <= max_degree; ++total) {
    // Exponent vectors of this total degree in lexicographic order (first
    // component largest first).
    std::vector<unsigned> e(n, 0);
    auto rec = [&](auto&& self, std::size_t pos, unsigned left) -> void {
      if (pos + 1 == n) {
        e[pos] = left;
        fs.emplace_back(Monomial{e});
        return;
      }
      for (unsigned p = left + 1; p-- > 0;) {
        e[pos] = p;
        self(self, pos + 1, left - p);
      }
    };
    rec(rec, 0, total);
  }
  return Dictionary(Family::polynomial, domain, std::move(fs));
}

Dictionary sigmoids(const Box& domain, std::span<const double> centers, double slope) {
  if (domain.dim() != 1) throw ParameterError("sigmoid factory is one-dimensional");
  if (!(slope != 0.0) || !std::isfinite(slope)) throw ParameterError("sigmoid slope must be finite and nonzero");
  std::vector<Function> fs;
  for (double c : centers) fs.emplace_back(Sigmoid{{slope}, -slope * c});
  return Dictionary(Family::sigmoid, domain, std::move(fs));
}

Dictionary trigonometric(const Box& domain, unsigned harmonics) {
  if (domain.dim() != 1) throw ParameterError("trigonometric factory is one-dimensional");
  const double span = domain.upper[0] - domain.lower[0];
  if (!(span > 0.0)) throw ParameterError("trigonometric factory needs a non-degenerate domain");
  const double omega = 2.0 * std::numbers::pi / span;
  std::vector<Function> fs;
  fs.emplace_back(Cosine{{0.0}, 0.0});
  for (unsigned k = 1; k <= harmonics; ++k) {
    fs.emplace_back(Cosine{{k * omega}, 0.0});
    fs.emplace_back(Cosine{{k * omega}, -0.5 * std::numbers::pi});
  }
  return Dictionary(Family::trigonometric, domain, std::move(fs));
}

void write_dictionary(std::ostream& os, const Dictionary& dict) {
  text::Writer w(os, "ctrlid-dictionary", 1);
  w.put("family", to_string(dict.family()));
  w.put("dim", dict.dim());
  w.put("domain_lower", dict.domain().lower);
  w.put("domain_upper", dict.domain().upper);
  w.put("size", dict.size());
  for (std::size_t i = 0; i < dict.size(); ++i) {
    Vector params = std::visit(
        Overloaded{[](const Gaussian& g) {
                     Vector p{g.width};
                     p.insert(p.end(), g.center.begin(), g.center.end());
                     return p;
                   },
                   [](const Monomial& m) { return Vector(m.degrees.begin(), m.degrees.end()); },
                   [](const Sigmoid& s) {
                     Vector p{s.bias};
                     p.insert(p.end(), s.weights.begin(), s.weights.end());
                     return p;
                   },
                   [](const Cosine& c) {
                     Vector p{c.phase};
                     p.insert(p.end(), c.frequencies.begin(), c.frequencies.end());
                     return p;
                   }},
        dict.function(i));
    w.put("phi", params);
  }
}

Dictionary read_dictionary(std::istream& is) {
  text::Reader r(is, "ctrlid-dictionary", 1);
  const Family family = family_from_string(r.get_string("family"));
  const std::size_t dim = r.get_size("dim");
  Box domain{r.get_vector("domain_lower"), r.get_vector("domain_upper")};
  if (domain.lower.size() != dim || domain.upper.size() != dim) {
    throw DataError("dictionary domain does not match dim");
  }
  const std::size_t m = r.get_size("size");
  std::vector<Function> fs;
  fs.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vector p = r.get_vector("phi");
    const bool has_scalar = family != Family::polynomial;
    if (p.size() != dim + (has_scalar ? 1 : 0)) throw DataError("phi line " + std::to_string(i) + " has wrong arity");
    const Vector tail(p.begin() + (has_scalar ? 1 : 0), p.end());
    switch (family) {
      case Family::gaussian: fs.emplace_back(Gaussian{tail, p[0]}); break;
      case Family::polynomial: {
        std::vector<unsigned> deg;
        for (double v : p) {
          if (v < 0 || v != std::floor(v)) throw DataError("polynomial degrees must be non-negative integers");
          deg.push_back(static_cast<unsigned>(v));
        }
        fs.emplace_back(Monomial{deg});
        break;
      }
      case Family::sigmoid: fs.emplace_back(Sigmoid{tail, p[0]}); break;
      case Family::trigonometric: fs.emplace_back(Cosine{tail, p[0]}); break;
    }
  }
  r.expect_end();
  return Dictionary(family, std::move(domain), std::move(fs));
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::accept: return "accept";
    case Verdict::reject_not_sparse: return "reject_not_sparse";
    case Verdict::reject_large_alpha: return "reject_large_alpha";
  }
  return "unknown";
}

Diagnosis diagnose(double alpha, std::size_t support_size, std::size_t dictionary_size,
                   const DiagnosisThresholds& thresholds) {
  if (dictionary_size == 0) throw ParameterError("dictionary size must be positive");
  Diagnosis d;
  d.alpha = alpha;
  d.sparsity_ratio = static_cast<double>(support_size) / static_cast<double>(dictionary_size);
  if (alpha > thresholds.alpha_small) {
    d.verdict = Verdict::reject_large_alpha;
  } else if (d.sparsity_ratio > thresholds.sparsity_max) {
    d.verdict = Verdict::reject_not_sparse;
  } else {
    d.verdict = Verdict::accept;
  }
  return d;
}

}  // namespace ctrlid::basis
