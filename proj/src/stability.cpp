#include "ctrlid/stability.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "ctrlid/errors.hpp"
#include "ctrlid/text_format.hpp"

namespace ctrlid::stability {

double baseline_bound(double gamma_gy, double gamma_ge, double g0_norm, double es_norm, double y0_norm,
                      std::size_t t) {
  if (!(gamma_gy >= 0.0 && gamma_gy < 1.0)) throw CertificateError("reference loop needs 0 <= gamma_gy < 1");
  const double k = 1.0 - gamma_gy;
  return gamma_ge / k * es_norm + std::pow(gamma_gy, static_cast<double>(t)) * y0_norm + g0_norm / k;
}

double StabilityCertificate::gamma_delta_limit() const {
  if (in.gamma_f == 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 - in.gamma_gy) / in.gamma_f;
}

StabilityCertificate certify(const CertificateInputs& in) {
  for (double v : {in.gamma_f, in.gamma_gy, in.gamma_ge, in.gamma_delta, in.gamma_khat, in.delta0_abs, in.g0_norm,
                   in.epsilon_y}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("certificate inputs must be finite and >= 0");
  }
  StabilityCertificate c;
  c.in = in;
  c.gamma = in.gamma_f * in.gamma_delta + in.gamma_gy;
  c.certified = c.gamma < 1.0 && in.gamma_gy < 1.0;
  return c;
}

namespace {

void require(const StabilityCertificate& c) {
  if (!c.certified) {
    throw CertificateError("loop is not certified: gamma = " + text::format_double(c.gamma) + " >= 1");
  }
}

double offset(const StabilityCertificate& c) {
  return (c.in.g0_norm + c.in.gamma_f * c.in.delta0_abs + c.in.gamma_f * c.in.gamma_khat * c.in.epsilon_y) /
         (1.0 - c.gamma);
}

}  // namespace

double learned_loop_bound(const StabilityCertificate& c, double es_norm, double y0_norm, std::size_t t) {
  require(c);
  const double k = 1.0 - c.gamma;
  return c.in.gamma_ge / k * es_norm + std::pow(c.gamma, static_cast<double>(t)) * y0_norm + offset(c);
}

double deviation_bound(const StabilityCertificate& c, double xi0_norm, double y0_norm, double es_norm,
                       std::size_t t) {
  require(c);
  const double k = 1.0 - c.gamma;
  const double td = static_cast<double>(t);
  return c.in.gamma_ge / k * es_norm + std::pow(c.gamma, td) * xi0_norm +
         c.in.gamma_f * c.in.gamma_delta / k * std::pow(c.in.gamma_gy, td) * y0_norm + offset(c);
}

void write_certificate(std::ostream& os, const StabilityCertificate& c) {
  text::Writer w(os, "ctrlid-certificate", 1);
  w.put("gamma_f", c.in.gamma_f);
  w.put("gamma_gy", c.in.gamma_gy);
  w.put("gamma_ge", c.in.gamma_ge);
  w.put("gamma_delta", c.in.gamma_delta);
  w.put("gamma_khat", c.in.gamma_khat);
  w.put("delta0_abs", c.in.delta0_abs);
  w.put("delta0_source", c.in.delta0_source);
  w.put("g0_norm", c.in.g0_norm);
  w.put("epsilon_y", c.in.epsilon_y);
  w.put("gamma", c.gamma);
  w.put("gamma_delta_limit", c.gamma_delta_limit());
  w.put("certified", c.certified);
}

}  // namespace ctrlid::stability
