#include "cogdyn/modal.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <sstream>

#include "cogdyn/errors.hpp"
#include "cogdyn/io.hpp"

namespace cogdyn {
namespace {

const double kSqrt3 = std::sqrt(3.0);

// Truncated second-order jet in the three actuator lengths.
template <int D>
struct Jet {
  double v = 0.0;
  Vec3 g = Vec3::Zero();
  Mat3 h = Mat3::Zero();
};

template <int D>
Jet<D> operator*(const Jet<D>& a, const Jet<D>& b) {
  Jet<D> c;
  c.v = a.v * b.v;
  if constexpr (D >= 1) c.g = a.v * b.g + b.v * a.g;
  if constexpr (D >= 2) {
    const Mat3 outer = a.g * b.g.transpose();
    const Mat3 sym = outer + outer.transpose();  // bit-exact symmetric
    c.h = a.v * b.h + b.v * a.h + sym;
  }
  return c;
}

template <int D>
Jet<D> operator+(const Jet<D>& a, const Jet<D>& b) {
  Jet<D> c;
  c.v = a.v + b.v;
  if constexpr (D >= 1) c.g = a.g + b.g;
  if constexpr (D >= 2) c.h = a.h + b.h;
  return c;
}

template <int D>
Jet<D> operator*(double s, const Jet<D>& a) {
  Jet<D> c;
  c.v = s * a.v;
  if constexpr (D >= 1) c.g = s * a.g;
  if constexpr (D >= 2) c.h = s * a.h;
  return c;
}

template <int D>
Jet<D> compose(const ProfileValue& f, const Jet<D>& u) {
  Jet<D> c;
  c.v = f.f;
  if constexpr (D >= 1) c.g = f.df * u.g;
  if constexpr (D >= 2) {
    // Materialize first: Eigen folds a scalar into one product factor, which breaks symmetry.
    const Mat3 gg = u.g * u.g.transpose();
    c.h = f.ddf * gg + f.df * u.h;
  }
  return c;
}

template <int D>
void store(const Jet<D>& j, double& value, int row, int col, SectionDerivs& out) {
  value = j.v;
  if constexpr (D >= 1)
    for (int a = 0; a < 3; ++a) out.R_q[a](row, col) = j.g(a);
  if constexpr (D >= 2)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) out.R_qq[a][b](row, col) = j.h(a, b);
}

template <int D>
void store_position(const Jet<D>& j, int row, SectionDerivs& out) {
  out.p(row) = j.v;
  if constexpr (D >= 1) out.p_q.row(row) = j.g.transpose();
  if constexpr (D >= 2)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) out.p_qq[a][b](row) = j.h(a, b);
}

template <int D>
void evaluate_impl(const SectionShape& shape, const Vec3& q, Station where, SectionDerivs& out) {
  const double inv = 1.0 / (3.0 * shape.radius());
  Jet<D> a, b, e;
  a.v = (q(1) + q(2) - 2.0 * q(0)) * inv;
  b.v = kSqrt3 * (q(2) - q(1)) * inv;
  e.v = (q(0) + q(1) + q(2)) / 3.0;
  if constexpr (D >= 1) {
    a.g = Vec3(-2.0 * inv, inv, inv);
    b.g = Vec3(0.0, -kSqrt3 * inv, kSqrt3 * inv);
    e.g = Vec3::Constant(1.0 / 3.0);
  }
  const Jet<D> aa = a * a, ab = a * b, bb = b * b;
  const Jet<D> u = aa + bb;

  ProfileSet prof;
  shape.profiles(u.v, where, D, prof);
  const Jet<D> lin = compose(prof[kRotLinear], u);
  const Jet<D> quad = compose(prof[kRotQuadratic], u);
  const Jet<D> lateral = shape.L0() * compose(prof[kLateralFixed], u) + e * compose(prof[kLateralStretch], u);
  const Jet<D> axial = shape.L0() * compose(prof[kAxialFixed], u) + e * compose(prof[kAxialStretch], u);

  const Jet<D> qaa = quad * aa, qab = quad * ab, qbb = quad * bb, qu = quad * u;
  const Jet<D> la = lin * a, lb = lin * b;

  if constexpr (D >= 1) {
    for (auto& m : out.R_q) m.setZero();
  }
  if constexpr (D >= 2) {
    for (auto& row : out.R_qq)
      for (auto& m : row) m.setZero();
  }
  store(-1.0 * qaa, out.R(0, 0), 0, 0, out);
  store(-1.0 * qab, out.R(0, 1), 0, 1, out);
  store(la, out.R(0, 2), 0, 2, out);
  store(-1.0 * qab, out.R(1, 0), 1, 0, out);
  store(-1.0 * qbb, out.R(1, 1), 1, 1, out);
  store(lb, out.R(1, 2), 1, 2, out);
  store(-1.0 * la, out.R(2, 0), 2, 0, out);
  store(-1.0 * lb, out.R(2, 1), 2, 1, out);
  store(-1.0 * qu, out.R(2, 2), 2, 2, out);
  out.R(0, 0) += 1.0;
  out.R(1, 1) += 1.0;
  out.R(2, 2) += 1.0;

  store_position(lateral * a, 0, out);
  store_position(lateral * b, 1, out);
  store_position(axial, 2, out);
}

// Coefficient (-1)^k / (2k + shift)! of the sinc-type series.
double alternating_inverse_factorial(int k, int shift) {
  double f = 1.0;
  for (int m = 2; m <= 2 * k + shift; ++m) f *= m;
  return ((k % 2) ? -1.0 : 1.0) / f;
}

// f(x), f'(x), f''(x) of sum_k c_k x^k.
ProfileValue horner(const double* c, int count, double x) {
  ProfileValue r;
  for (int k = count - 1; k >= 0; --k) {
    r.ddf = r.ddf * x + 2.0 * r.df;
    r.df = r.df * x + r.f;
    r.f = r.f * x + c[k];
  }
  return r;
}

struct SeriesTables {
  static constexpr int kTerms = 26;
  std::array<double, kTerms> s{}, c{}, e{};
  SeriesTables() {
    for (int k = 0; k < kTerms; ++k) {
      s[k] = alternating_inverse_factorial(k, 1);
      c[k] = alternating_inverse_factorial(k, 2);
      e[k] = alternating_inverse_factorial(k, 3);
    }
  }
};

const SeriesTables& tables() {
  static const SeriesTables t;
  return t;
}

// sin(sqrt x)/sqrt x, (1 - cos sqrt x)/x and (1 - S(x))/x with derivatives.
struct ArcFunctions {
  ProfileValue S, C, E;
};

ArcFunctions arc_functions(double x) {
  ArcFunctions out;
  if (x <= 4.0) {
    const auto& t = tables();
    out.S = horner(t.s.data(), SeriesTables::kTerms, x);
    out.C = horner(t.c.data(), SeriesTables::kTerms, x);
    out.E = horner(t.e.data(), SeriesTables::kTerms, x);
    return out;
  }
  const double phi = std::sqrt(x);
  const double sn = std::sin(phi), cs = std::cos(phi);
  ProfileValue& S = out.S;
  ProfileValue& C = out.C;
  ProfileValue& E = out.E;
  S.f = sn / phi;
  S.df = (cs - S.f) / (2.0 * x);
  S.ddf = -(0.25 * S.f + 1.5 * S.df) / x;
  C.f = (1.0 - cs) / x;
  C.df = (0.5 * S.f - C.f) / x;
  C.ddf = (0.5 * S.df - 2.0 * C.df) / x;
  E.f = (1.0 - S.f) / x;
  E.df = (-S.df - E.f) / x;
  E.ddf = (-S.ddf - 2.0 * E.df) / x;
  return out;
}

constexpr std::array<int, kProfileCount> kXiOffset = {1, 2, 2, 2, 1, 1};
// Total degree in (l1, l2, l3) of the k = 0 term of each profile's entries.
constexpr std::array<int, kProfileCount> kBaseDegree = {1, 2, 1, 2, 0, 1};
constexpr std::array<bool, kProfileCount> kSineType = {true, false, false, false, true, true};

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw ValidationError("modal cache: bad number '" + token + "'");
  return v;
}

// Sparse polynomial in (l1, l2, l3, xi) used only for expansion.
using Key = std::array<int, 4>;
using Poly = std::map<Key, double>;

Poly multiply(const Poly& a, const Poly& b) {
  Poly c;
  for (const auto& [ka, va] : a)
    for (const auto& [kb, vb] : b) {
      Key k{ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2], ka[3] + kb[3]};
      c[k] += va * vb;
    }
  return c;
}

Poly add(Poly a, const Poly& b, double scale = 1.0) {
  for (const auto& [k, v] : b) a[k] += scale * v;
  return a;
}

Poly linear(double c1, double c2, double c3) {
  Poly p;
  if (c1 != 0.0) p[{1, 0, 0, 0}] = c1;
  if (c2 != 0.0) p[{0, 1, 0, 0}] = c2;
  if (c3 != 0.0) p[{0, 0, 1, 0}] = c3;
  return p;
}

Poly constant(double c) { return Poly{{Key{0, 0, 0, 0}, c}}; }

EntryPolynomial to_entry(const Poly& p) {
  EntryPolynomial out;
  for (const auto& [k, v] : p)
    if (v != 0.0) out.push_back({{k[0], k[1], k[2]}, k[3], v});
  return out;
}

}  // namespace

CurveParams curve_params(const Vec3& q, double L0, double r) {
  const double l1 = q(0), l2 = q(1), l3 = q(2);
  const double radicand = std::max(0.0, l1 * l1 + l2 * l2 + l3 * l3 - l1 * l2 - l2 * l3 - l1 * l3);
  CurveParams c;
  c.phi = 2.0 * std::sqrt(radicand) / (3.0 * r);
  const double s = L0 + (l1 + l2 + l3) / 3.0;
  if (c.phi > 0.0) {
    c.theta = std::atan2(kSqrt3 * (l3 - l2), l2 + l3 - 2.0 * l1);
    c.lambda = s / c.phi;
  } else {
    c.theta = 0.0;
    c.lambda = std::numeric_limits<double>::infinity();
  }
  return c;
}

SectionShape::SectionShape(double L0, double r) : L0_(L0), r_(r) {
  if (!(L0 > 0.0) || !(r > 0.0)) throw ValidationError("section length and radius must be positive");
}

void SectionShape::evaluate(const Vec3& q, Station where, Derivs order, SectionDerivs& out) const {
  switch (order) {
    case Derivs::none: evaluate_impl<0>(*this, q, where, out); break;
    case Derivs::first: evaluate_impl<1>(*this, q, where, out); break;
    case Derivs::second: evaluate_impl<2>(*this, q, where, out); break;
  }
}

SectionDerivs SectionShape::evaluate(const Vec3& q, Station where, Derivs order) const {
  SectionDerivs out;
  evaluate(q, where, order, out);
  return out;
}

SectionPose SectionShape::pose(const Vec3& q, double xi) const {
  SectionDerivs d;
  evaluate_impl<0>(*this, q, Station::at(xi), d);
  return d.pose();
}

void ExactSection::profiles(double u, Station where, int nderiv, ProfileSet& out) const {
  (void)nderiv;
  ProfileValue sine, cosine;
  if (where.is_mean()) {
    // Integrating xi S(xi^2 u) over [0, 1] gives C(u); xi^2 C(xi^2 u) gives E(u).
    const ArcFunctions f = arc_functions(u);
    sine = f.C;
    cosine = f.E;
  } else {
    const double xi = where.xi(), x2 = xi * xi;
    const ArcFunctions f = arc_functions(x2 * u);
    sine = {xi * f.S.f, xi * x2 * f.S.df, xi * x2 * x2 * f.S.ddf};
    cosine = {x2 * f.C.f, x2 * x2 * f.C.df, x2 * x2 * x2 * f.C.ddf};
  }
  for (int k = 0; k < kProfileCount; ++k) out[k] = kSineType[k] ? sine : cosine;
}

ModalSection::ModalSection(double L0, double r, double l_max, int order)
    : SectionShape(L0, r), l_max_(l_max), order_(order) {
  if (!(l_max > 0.0)) throw ValidationError("modal section needs l_max > 0");
  if (order < 1) throw ValidationError("modal order must be at least 1");
  for (int k = 0; k < kProfileCount; ++k) {
    const int slack = order - kBaseDegree[k];
    const int terms = slack >= 0 ? slack / 2 + 1 : 0;
    coeff_[k].resize(terms);
    for (int m = 0; m < terms; ++m) coeff_[k][m] = alternating_inverse_factorial(m, kSineType[k] ? 1 : 2);
  }
}

void ModalSection::profiles(double u, Station where, int nderiv, ProfileSet& out) const {
  (void)nderiv;
  std::array<double, 32> d{};
  for (int k = 0; k < kProfileCount; ++k) {
    const auto& c = coeff_[k];
    const int n = static_cast<int>(c.size());
    if (where.is_mean()) {
      for (int m = 0; m < n; ++m) d[m] = c[m] / (2 * m + kXiOffset[k] + 1);
    } else {
      const double xi = where.xi(), x2 = xi * xi;
      double w = kXiOffset[k] == 1 ? xi : x2;
      for (int m = 0; m < n; ++m, w *= x2) d[m] = c[m] * w;
    }
    out[k] = horner(d.data(), n, u);
  }
}

std::array<EntryPolynomial, 12> ModalSection::expand() const {
  const double inv = 1.0 / (3.0 * radius());
  const Poly a = linear(-2.0 * inv, inv, inv);
  const Poly b = linear(0.0, -kSqrt3 * inv, kSqrt3 * inv);
  const Poly e = linear(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
  const Poly u = add(multiply(a, a), multiply(b, b));

  std::array<Poly, kProfileCount> g;
  for (int k = 0; k < kProfileCount; ++k) {
    Poly upow = constant(1.0);
    for (std::size_t m = 0; m < coeff_[k].size(); ++m) {
      for (const auto& [key, v] : upow) {
        Key shifted = key;
        shifted[3] += static_cast<int>(2 * m) + kXiOffset[k];
        g[k][shifted] += v * coeff_[k][m];
      }
      upow = multiply(upow, u);
    }
  }
  const Poly lateral = add(multiply(constant(L0()), g[kLateralFixed]), multiply(e, g[kLateralStretch]));
  const Poly axial = add(multiply(constant(L0()), g[kAxialFixed]), multiply(e, g[kAxialStretch]));
  const Poly& lin = g[kRotLinear];
  const Poly& quad = g[kRotQuadratic];

  std::array<EntryPolynomial, 12> out;
  out[0] = to_entry(add(constant(1.0), multiply(quad, multiply(a, a)), -1.0));
  out[1] = to_entry(add({}, multiply(quad, multiply(a, b)), -1.0));
  out[2] = to_entry(multiply(lin, a));
  out[3] = out[1];
  out[4] = to_entry(add(constant(1.0), multiply(quad, multiply(b, b)), -1.0));
  out[5] = to_entry(multiply(lin, b));
  out[6] = to_entry(add({}, multiply(lin, a), -1.0));
  out[7] = to_entry(add({}, multiply(lin, b), -1.0));
  out[8] = to_entry(add(constant(1.0), multiply(quad, u), -1.0));
  out[9] = to_entry(multiply(lateral, a));
  out[10] = to_entry(multiply(lateral, b));
  out[11] = to_entry(axial);
  return out;
}

std::string ModalSection::serialize() const {
  std::ostringstream os;
  os << "cogdyn-modal " << kFormatVersion << "\n";
  os << "L0 " << hex(L0()) << "\nr " << hex(radius()) << "\nl_max " << hex(l_max_) << "\norder " << order_ << "\n";
  for (int k = 0; k < kProfileCount; ++k) {
    os << "profile " << k << " " << coeff_[k].size();
    for (double c : coeff_[k]) os << " " << hex(c);
    os << "\n";
  }
  const CertificationReport& c = report_;
  os << "certification " << c.points << " " << c.xi_values << " " << hex(c.max_position_error) << " "
     << hex(c.max_rotation_error) << " " << hex(c.max_orthogonality_error) << " " << hex(c.worst_q(0)) << " "
     << hex(c.worst_q(1)) << " " << hex(c.worst_q(2)) << " " << hex(c.worst_xi) << " " << (c.passed ? 1 : 0)
     << "\n";
  return os.str();
}

ModalSection ModalSection::deserialize(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string tag, tok;
  int version = 0;
  if (!(is >> tag >> version) || tag != "cogdyn-modal" || version != kFormatVersion)
    throw ValidationError("modal cache: unsupported header");
  auto field = [&](const char* name) {
    if (!(is >> tag >> tok) || tag != name) throw ValidationError(std::string("modal cache: expected ") + name);
    return tok;
  };
  const double L0 = parse_double(field("L0"));
  const double r = parse_double(field("r"));
  const double l_max = parse_double(field("l_max"));
  const int order = std::stoi(field("order"));
  ModalSection ms(L0, r, l_max, order);
  for (int k = 0; k < kProfileCount; ++k) {
    int id = -1;
    std::size_t count = 0;
    if (!(is >> tag >> id >> count) || tag != "profile" || id != k || count != ms.coeff_[k].size())
      throw ValidationError("modal cache: profile table mismatch");
    for (std::size_t m = 0; m < count; ++m) {
      is >> tok;
      ms.coeff_[k][m] = parse_double(tok);
    }
  }
  CertificationReport& c = ms.report_;
  std::array<std::string, 7> t;
  int passed = 0;
  if (!(is >> tag >> c.points >> c.xi_values) || tag != "certification")
    throw ValidationError("modal cache: missing certification");
  for (auto& s : t)
    if (!(is >> s)) throw ValidationError("modal cache: truncated certification");
  if (!(is >> passed)) throw ValidationError("modal cache: truncated certification");
  c.max_position_error = parse_double(t[0]);
  c.max_rotation_error = parse_double(t[1]);
  c.max_orthogonality_error = parse_double(t[2]);
  c.worst_q = Vec3(parse_double(t[3]), parse_double(t[4]), parse_double(t[5]));
  c.worst_xi = parse_double(t[6]);
  c.passed = passed == 1;
  return ms;
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  for (int i = index; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

CertificationReport certify(const ModalSection& section, int points, int xi_values) {
  const ExactSection exact(section.L0(), section.radius());
  CertificationReport rep;
  rep.points = points;
  rep.xi_values = xi_values;
  double worst_score = -1.0;

  std::vector<Vec3> samples;
  samples.reserve(points + 8);
  // The bending angle peaks on the cube's edges, so the corners join the Halton set.
  for (int c = 0; c < 8; ++c)
    samples.emplace_back((c & 1) * section.l_max(), ((c >> 1) & 1) * section.l_max(), ((c >> 2) & 1) * section.l_max());
  for (int i = 1; i <= points; ++i)
    samples.emplace_back(halton(i, 2) * section.l_max(), halton(i, 3) * section.l_max(), halton(i, 5) * section.l_max());

  for (const Vec3& q : samples) {
    for (int k = 0; k < xi_values; ++k) {
      const double xi = xi_values > 1 ? static_cast<double>(k) / (xi_values - 1) : 1.0;
      const SectionPose m = section.pose(q, xi);
      const SectionPose x = exact.pose(q, xi);
      const double pos = (m.p - x.p).cwiseAbs().maxCoeff();
      const double rot = (m.R - x.R).cwiseAbs().maxCoeff();
      const double orth = (m.R.transpose() * m.R - Mat3::Identity()).norm();
      rep.max_position_error = std::max(rep.max_position_error, pos);
      rep.max_rotation_error = std::max(rep.max_rotation_error, rot);
      rep.max_orthogonality_error = std::max(rep.max_orthogonality_error, orth);
      const double score = std::max(pos / (ModalSection::kPositionTolerance * section.L0()),
                                    rot / ModalSection::kRotationTolerance);
      if (score > worst_score) {
        worst_score = score;
        rep.worst_q = q;
        rep.worst_xi = xi;
      }
    }
  }
  rep.passed = rep.max_position_error <= ModalSection::kPositionTolerance * section.L0() &&
               rep.max_rotation_error <= ModalSection::kRotationTolerance &&
               rep.max_orthogonality_error <= 10.0 * ModalSection::kRotationTolerance;
  return rep;
}

ModalSection build_modal_section(double L0, double r, double l_max, int order) {
  ModalSection ms(L0, r, l_max, order);
  ms.report_ = certify(ms);
  if (!ms.report_.passed) {
    const CertificationReport& c = ms.report_;
    std::ostringstream os;
    os.precision(3);
    os << "modal order " << order << " fails certification on [0, " << l_max << "]^3: max position error "
       << c.max_position_error << " m, max rotation error " << c.max_rotation_error << ", worst at q = ("
       << c.worst_q(0) << ", " << c.worst_q(1) << ", " << c.worst_q(2) << "), xi = " << c.worst_xi;
    throw ValidationError(os.str());
  }
  return ms;
}

ModalSection build_modal_section_auto(double L0, double r, double l_max, int first_order, int last_order) {
  for (int order = first_order;; ++order) {
    try {
      return build_modal_section(L0, r, l_max, order);
    } catch (const ValidationError&) {
      if (order >= last_order) throw;
    }
  }
}

ModalCache::ModalCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path ModalCache::default_directory() {
  if (const char* env = std::getenv("COGDYN_CACHE_DIR"); env && *env) return env;
  std::error_code ec;
  auto tmp = std::filesystem::temp_directory_path(ec);
  return ec ? std::filesystem::path{} : tmp / "cogdyn-modal-cache";
}

ModalCache& ModalCache::global() {
  static ModalCache cache(default_directory());
  return cache;
}

std::shared_ptr<const ModalSection> ModalCache::get(double L0, double r, double l_max, int order) {
  const std::string key = "modal-v" + std::to_string(ModalSection::kFormatVersion) + "-" +
                          content_hash(hex(L0) + " " + hex(r) + " " + hex(l_max)) + "-o" + std::to_string(order) +
                          ".txt";
  std::lock_guard<std::mutex> lock(mu_);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  std::shared_ptr<const ModalSection> result;
  const auto file = dir_.empty() ? std::filesystem::path{} : dir_ / key;
  if (!file.empty() && std::filesystem::exists(file)) {
    try {
      auto ms = ModalSection::deserialize(read_text_file(file));
      if (ms.L0() == L0 && ms.radius() == r && ms.l_max() == l_max && ms.certification().passed &&
          (order == 0 || ms.order() == order))
        result = std::make_shared<const ModalSection>(std::move(ms));
    } catch (const ValidationError&) {
      // Unreadable cache entries are rebuilt below.
    }
  }
  if (!result) {
    result = std::make_shared<const ModalSection>(order == 0 ? build_modal_section_auto(L0, r, l_max)
                                                             : build_modal_section(L0, r, l_max, order));
    if (!file.empty()) {
      try {
        write_file_atomic(file, result->serialize());
      } catch (const std::exception&) {
        // A read-only cache directory only costs a rebuild next time.
      }
    }
  }
  memo_[key] = result;
  return result;
}

namespace {
void check_xi(double xi) {
  if (!(xi >= 0.0 && xi <= 1.0)) throw ValidationError("xi must lie in [0, 1]");
}
}  // namespace

void require_in_domain(const ModalSection& ms, const Vec3& q) {
  const double slack = 1e-12 * ms.l_max();
  for (int j = 0; j < 3; ++j)
    if (!(q(j) >= -slack && q(j) <= ms.l_max() + slack)) {
      std::ostringstream os;
      os << "actuator " << j + 1 << " length " << q(j) << " outside modal domain [0, " << ms.l_max() << "]";
      throw ValidationError(os.str());
    }
}
SectionPose eval_section(const ModalSection& ms, const Vec3& q, double xi) {
  require_in_domain(ms, q);
  check_xi(xi);
  return ms.pose(q, xi);
}

SectionDerivs eval_section_derivs(const ModalSection& ms, const Vec3& q, double xi) {
  require_in_domain(ms, q);
  check_xi(xi);
  return ms.evaluate(q, Station::at(xi), Derivs::second);
}

SectionDerivs cog_section(const ModalSection& ms, const Vec3& q) {
  require_in_domain(ms, q);
  return ms.evaluate(q, Station::mean(), Derivs::second);
}

}  // namespace cogdyn
