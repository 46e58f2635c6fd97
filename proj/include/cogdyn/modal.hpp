#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "cogdyn/math.hpp"

namespace cogdyn {

// Constant-curvature arc parameters of one section.
struct CurveParams {
  double lambda = 0.0;  // arc radius; infinite when straight
  double phi = 0.0;     // subtended angle
  double theta = 0.0;   // bending-plane angle
};

CurveParams curve_params(const Vec3& q, double L0, double r);

struct SectionPose {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();
};

// Pose of a section plus its first and second partials in the three
// actuator lengths. Second partials are stored in full, R_qq[j][k] ==
// R_qq[k][j] bit for bit.
struct SectionDerivs {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();
  std::array<Mat3, 3> R_q{};
  Mat3 p_q = Mat3::Zero();
  std::array<std::array<Mat3, 3>, 3> R_qq{};
  std::array<std::array<Vec3, 3>, 3> p_qq{};

  SectionPose pose() const { return {R, p}; }
};

enum class Derivs { none = 0, first = 1, second = 2 };

// Where along a section to evaluate: a point xi on the neutral axis, or the
// average over xi in [0, 1], which is the centre-of-gravity frame.
class Station {
 public:
  static Station at(double xi) { return Station(false, xi); }
  static Station mean() { return Station(true, 0.0); }
  bool is_mean() const { return mean_; }
  double xi() const { return xi_; }

 private:
  Station(bool mean, double xi) : mean_(mean), xi_(xi) {}
  bool mean_;
  double xi_;
};

// The section transform factors as
//   R = I + g0 [w]x + g1 [w]x^2,   p = ((L0 g2 + e g3) a, (L0 g2 + e g3) b, L0 g4 + e g5)
// with a = phi cos(theta), b = phi sin(theta), w = (-b, a, 0), e the mean
// elongation and every g_k a function of u = a^2 + b^2 and xi only. The six
// profiles are what distinguishes the closed form from a truncated series.
enum Profile { kRotLinear, kRotQuadratic, kLateralFixed, kLateralStretch, kAxialFixed, kAxialStretch, kProfileCount };

struct ProfileValue {
  double f = 0.0, df = 0.0, ddf = 0.0;  // value and derivatives in u
};
using ProfileSet = std::array<ProfileValue, kProfileCount>;

class SectionShape {
 public:
  SectionShape(double L0, double r);
  virtual ~SectionShape() = default;

  double L0() const { return L0_; }
  double radius() const { return r_; }

  void evaluate(const Vec3& q, Station where, Derivs order, SectionDerivs& out) const;
  SectionDerivs evaluate(const Vec3& q, Station where, Derivs order) const;
  SectionPose pose(const Vec3& q, double xi) const;

  virtual void profiles(double u, Station where, int nderiv, ProfileSet& out) const = 0;

 private:
  double L0_;
  double r_;
};

// Closed-form trigonometric evaluation; accurate at any bending angle.
class ExactSection final : public SectionShape {
 public:
  using SectionShape::SectionShape;
  void profiles(double u, Station where, int nderiv, ProfileSet& out) const override;
};

struct CertificationReport {
  int points = 0;
  int xi_values = 0;
  double max_position_error = 0.0;  // absolute, metres
  double max_rotation_error = 0.0;  // largest entry deviation
  double max_orthogonality_error = 0.0;  // Frobenius norm of R^T R - I
  Vec3 worst_q = Vec3::Zero();
  double worst_xi = 0.0;
  bool passed = false;
};

// One monomial of an expanded HTM entry: coeff * l1^i l2^j l3^k xi^m.
struct Monomial {
  std::array<int, 3> l_power{};
  int xi_power = 0;
  double coeff = 0.0;
};
using EntryPolynomial = std::vector<Monomial>;

// Truncated Taylor representation of the section transform. Every HTM entry
// is the total-degree-`order` Taylor polynomial in (l1, l2, l3) of the exact
// entry, with polynomial dependence on xi. The polynomial is stored in the
// factored profile form above; expand() recovers explicit monomials.
class ModalSection final : public SectionShape {
 public:
  static constexpr int kDefaultOrder = 15;
  static constexpr int kFormatVersion = 1;
  static constexpr double kPositionTolerance = 1e-6;  // relative to L0
  static constexpr double kRotationTolerance = 1e-6;

  ModalSection(double L0, double r, double l_max, int order);

  int order() const { return order_; }
  double l_max() const { return l_max_; }
  const CertificationReport& certification() const { return report_; }
  const std::vector<double>& series(Profile k) const { return coeff_[k]; }

  void profiles(double u, Station where, int nderiv, ProfileSet& out) const override;

  // The 12 entries R00..R22, px, py, pz as explicit polynomials.
  std::array<EntryPolynomial, 12> expand() const;

  std::string serialize() const;
  static ModalSection deserialize(std::string_view text);

 private:
  friend ModalSection build_modal_section(double, double, double, int);
  double l_max_;
  int order_;
  std::array<std::vector<double>, kProfileCount> coeff_;
  CertificationReport report_;
};

CertificationReport certify(const ModalSection& section, int points = 10000, int xi_values = 17);

// Throws ValidationError (with the worst error and sample point) when the
// polynomial misses the tolerances anywhere on [0, l_max]^3 x [0, 1].
ModalSection build_modal_section(double L0, double r, double l_max, int order = ModalSection::kDefaultOrder);

// Lowest order >= first_order that certifies.
ModalSection build_modal_section_auto(double L0, double r, double l_max,
                                      int first_order = ModalSection::kDefaultOrder, int last_order = 40);

// Disk cache of certified sections keyed by (L0, r, l_max, order, format).
// Order 0 means automatic selection. Thread safe.
class ModalCache {
 public:
  explicit ModalCache(std::filesystem::path dir = {});
  std::shared_ptr<const ModalSection> get(double L0, double r, double l_max, int order);
  static std::filesystem::path default_directory();
  static ModalCache& global();

 private:
  std::filesystem::path dir_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const ModalSection>> memo_;
};

// Throws ValidationError when q leaves [0, l_max]^3.
void require_in_domain(const ModalSection& ms, const Vec3& q);

// Domain-checked single-section operations.
SectionPose eval_section(const ModalSection& ms, const Vec3& q, double xi);
SectionDerivs eval_section_derivs(const ModalSection& ms, const Vec3& q, double xi);
SectionDerivs cog_section(const ModalSection& ms, const Vec3& q);

double halton(int index, int base);

}  // namespace cogdyn
