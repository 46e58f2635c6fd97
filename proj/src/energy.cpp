#include "cogdyn/energy.hpp"

#include <json.hpp>

#include "cogdyn/cog.hpp"
#include "cogdyn/errors.hpp"
#include "cogdyn/io.hpp"

namespace cogdyn {
namespace {

constexpr const char* kCoefficientFormat = "cogdyn-shaping-coefficients";

Vec3 read_positive_triple(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("coefficient file lacks '") + key + "'");
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw ValidationError(std::string("'") + key + "' must be an array of 3 numbers");
  Vec3 v;
  for (int k = 0; k < 3; ++k) {
    if (!a[k].is_number()) throw ValidationError(std::string("'") + key + "' must be an array of 3 numbers");
    v(k) = a[k].get<double>();
    if (!std::isfinite(v(k)) || v(k) <= 0.0)
      throw ValidationError(std::string("'") + key + "' entries must be finite and positive");
  }
  return v;
}

Mat3 rate_of(const std::array<Mat3, 3>& partials, const Vec3& rate) {
  return partials[0] * rate(0) + partials[1] * rate(1) + partials[2] * rate(2);
}

// Sum over the first two columns of a_c . b_c, i.e. T2(A^T B).
double trace2_product(const Mat3& A, const Mat3& B) { return A.col(0).dot(B.col(0)) + A.col(1).dot(B.col(1)); }

}  // namespace

ShapingCoefficients parse_coefficients(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("coefficient file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("coefficient file must hold a JSON object");
  return {read_positive_triple(j, "beta_w"), read_positive_triple(j, "beta_v")};
}

ShapingCoefficients load_coefficients(const std::filesystem::path& path) {
  return parse_coefficients(read_text_file(path));
}

std::string serialize_coefficients(const ShapingCoefficients& c) {
  nlohmann::ordered_json j;
  j["format"] = kCoefficientFormat;
  j["version"] = 1;
  j["beta_w"] = {c.beta_w(0), c.beta_w(1), c.beta_w(2)};
  j["beta_v"] = {c.beta_v(0), c.beta_v(1), c.beta_v(2)};
  return j.dump(2) + "\n";
}

double total_kinetic(const std::vector<KineticEnergy>& sections) {
  double t = 0.0;
  for (const KineticEnergy& k : sections) t += k.total();
  return t;
}

KineticEnergy section_kinetic_integral(const SectionShape& shape, double mass, const Vec3& qi, const Vec3& rate,
                                       const BodyVelocity& prev, int quad_order) {
  const QuadratureRule& rule = gauss_legendre(quad_order);
  const double Ixx = disc_inertia(mass, shape.radius());
  KineticEnergy k;
  SectionDerivs d;
  for (int n = 0; n < rule.size(); ++n) {
    shape.evaluate(qi, Station::at(rule.nodes[n]), Derivs::first, d);
    const Mat3 Omega = d.R.transpose() * (prev.Omega * d.R + rate_of(d.R_q, rate));
    const Vec3 upsilon = d.R.transpose() * (prev.upsilon + prev.Omega * d.p + d.p_q * rate);
    k.K_w += rule.weights[n] * 0.5 * Ixx * trace2(Omega.transpose() * Omega);
    k.K_v += rule.weights[n] * 0.5 * mass * upsilon.squaredNorm();
  }
  return k;
}

KineticEnergy section_kinetic_cog(const SectionShape& shape, double mass, const Vec3& qi, const Vec3& rate,
                                  const BodyVelocity& prev, const ShapingCoefficients& coeffs) {
  const SectionDerivs c = shape.evaluate(qi, Station::mean(), Derivs::first);
  const double Ixx = disc_inertia(mass, shape.radius());
  const Mat3 Rdot = rate_of(c.R_q, rate);
  const Mat3 spun = prev.Omega * c.R;
  const Vec3 pdot = c.p_q * rate;
  const Vec3 swept = prev.Omega * c.p;
  const Vec3& bw = coeffs.beta_w;
  const Vec3& bv = coeffs.beta_v;

  KineticEnergy k;
  k.K_w = 0.5 * Ixx *
          (bw(0) * trace2_product(spun, spun) + 2.0 * bw(1) * trace2_product(Rdot, spun) +
           bw(2) * trace2_product(Rdot, Rdot));
  k.K_v = 0.5 * mass *
          (prev.upsilon.squaredNorm() + 2.0 * prev.upsilon.dot(swept) + 2.0 * prev.upsilon.dot(pdot) +
           bv(0) * swept.squaredNorm() + 2.0 * bv(1) * swept.dot(pdot) + bv(2) * pdot.squaredNorm());
  return k;
}

std::vector<KineticEnergy> kinetic_integral(const Arm& arm, const VecX& q, const VecX& qdot, int quad_order) {
  const std::vector<BodyVelocity> tips = chain_velocities(arm, q, qdot);
  std::vector<KineticEnergy> out(arm.size());
  for (int i = 0; i < arm.size(); ++i)
    out[i] = section_kinetic_integral(arm.shape(i), arm.params(i).mass, Arm::joints(q, i), Arm::joints(qdot, i),
                                      i == 0 ? BodyVelocity{} : tips[i - 1], quad_order);
  return out;
}

std::vector<KineticEnergy> kinetic_cog(const Arm& arm, const VecX& q, const VecX& qdot,
                                       const ShapingCoefficients& coeffs) {
  const std::vector<BodyVelocity> tips = chain_velocities(arm, q, qdot);
  std::vector<KineticEnergy> out(arm.size());
  for (int i = 0; i < arm.size(); ++i)
    out[i] = section_kinetic_cog(arm.shape(i), arm.params(i).mass, Arm::joints(q, i), Arm::joints(qdot, i),
                                 i == 0 ? BodyVelocity{} : tips[i - 1], coeffs);
  return out;
}

ResidualTerms energy_residual_terms(const SectionShape& shape, const Vec3& qi, const Vec3& rate, const Mat3& W,
                                    int quad_order) {
  ResidualTerms t{};
  const QuadratureRule& rule = gauss_legendre(quad_order);
  SectionDerivs d;
  for (int n = 0; n < rule.size(); ++n) {
    shape.evaluate(qi, Station::at(rule.nodes[n]), Derivs::first, d);
    const double w = rule.weights[n];
    const Mat3 Rdot = rate_of(d.R_q, rate);
    const Mat3 spun = W * d.R;
    const Vec3 swept = W * d.p;
    const Vec3 pdot = d.p_q * rate;
    t[kResA].integral += w * swept.squaredNorm();
    t[kResB].integral += w * swept.dot(pdot);
    t[kResC].integral += w * pdot.squaredNorm();
    t[kResD].integral += w * trace2_product(Rdot, Rdot);
    t[kResE].integral += w * 2.0 * trace2_product(spun, spun);
    t[kResF].integral += w * trace2_product(Rdot, spun);
  }
  const SectionDerivs c = shape.evaluate(qi, Station::mean(), Derivs::first);
  const Mat3 Rdot = rate_of(c.R_q, rate);
  const Mat3 spun = W * c.R;
  const Vec3 swept = W * c.p;
  const Vec3 pdot = c.p_q * rate;
  t[kResA].cog = swept.squaredNorm();
  t[kResB].cog = swept.dot(pdot);
  t[kResC].cog = pdot.squaredNorm();
  t[kResD].cog = trace2_product(Rdot, Rdot);
  t[kResE].cog = 2.0 * trace2_product(spun, spun);
  t[kResF].cog = trace2_product(Rdot, spun);
  return t;
}

ResidualTerms energy_residual_terms(const Arm& arm, const VecX& q, const VecX& qdot, int i, int quad_order) {
  const Mat3 W = i == 0 ? Mat3::Zero() : chain_velocities(arm, q, qdot)[i - 1].Omega;
  return energy_residual_terms(arm.shape(i), Arm::joints(q, i), Arm::joints(qdot, i), W, quad_order);
}

std::array<double, kResidualCount> residual_weights(double mass, double r) {
  const double Ixx = disc_inertia(mass, r);
  return {0.5 * mass, mass, 0.5 * mass, 0.5 * Ixx, 0.25 * Ixx, Ixx};
}

double residual_beta(const ShapingCoefficients& c, int k) {
  switch (k) {
    case kResA: return c.beta_v(0);
    case kResB: return c.beta_v(1);
    case kResC: return c.beta_v(2);
    case kResD: return c.beta_w(2);
    case kResE: return c.beta_w(0);
    case kResF: return c.beta_w(1);
  }
  throw ValidationError("residual index out of range");
}

double Potential::total() const {
  double t = 0.0;
  for (double g : gravity) t += g;
  for (double e : elastic) t += e;
  return t;
}

Potential potential(const Arm& arm, const VecX& q) {
  const std::vector<CogPose> cog = cog_chain(arm, q);
  Potential out;
  out.gravity.resize(arm.size());
  out.elastic.resize(arm.size());
  for (int i = 0; i < arm.size(); ++i) {
    const Vec3 qi = Arm::joints(q, i);
    out.gravity[i] = -arm.params(i).mass * arm.gravity().dot(cog[i].p);
    out.elastic[i] = 0.5 * qi.dot(arm.params(i).Ke * qi);
  }
  return out;
}

}  // namespace cogdyn
