#include "cogdyn/arm_model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "cogdyn/errors.hpp"
#include "cogdyn/io.hpp"

namespace cogdyn {
namespace {

using nlohmann::json;

std::string where(int section) { return "section " + std::to_string(section + 1) + ": "; }

void check_matrix(const Mat3& A, const char* name, int section) {
  if (!A.allFinite()) throw ValidationError(where(section) + name + " has non-finite entries");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError(where(section) + name + " is not symmetric");
  const double lowest = Eigen::SelfAdjointEigenSolver<Mat3>(A, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (lowest < -1e-12 * scale)
    throw ValidationError(where(section) + name + " is not positive semidefinite");
}

double number(const json& j, const char* key, int section, bool required, double fallback = 0.0) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) throw ValidationError(where(section) + "missing field " + key);
    return fallback;
  }
  if (!it->is_number()) throw ValidationError(where(section) + "field " + key + " must be a number");
  return it->get<double>();
}

// A scalar means scalar times identity; otherwise a 3x3 nested array.
Mat3 matrix(const json& j, const char* key, int section) {
  auto it = j.find(key);
  if (it == j.end()) return Mat3::Zero();
  if (it->is_number()) return it->get<double>() * Mat3::Identity();
  if (!it->is_array() || it->size() != 3)
    throw ValidationError(where(section) + "field " + key + " must be a scalar or a 3x3 array");
  Mat3 A;
  for (int r = 0; r < 3; ++r) {
    const json& row = (*it)[r];
    if (!row.is_array() || row.size() != 3)
      throw ValidationError(where(section) + "field " + key + " must be a scalar or a 3x3 array");
    for (int c = 0; c < 3; ++c) {
      if (!row[c].is_number()) throw ValidationError(where(section) + "field " + key + " has a non-numeric entry");
      A(r, c) = row[c].get<double>();
    }
  }
  return A;
}

json to_json(const Mat3& A) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({A(r, 0), A(r, 1), A(r, 2)});
  return rows;
}

}  // namespace

void validate_model(const ArmModel& model) {
  if (model.sections.empty()) throw ValidationError("arm must have at least one section");
  if (!model.gravity.allFinite()) throw ValidationError("gravity has non-finite entries");
  if (model.modal_order < 0) throw ValidationError("modal_order must be non-negative");
  for (int i = 0; i < model.size(); ++i) {
    const SectionParams& s = model.sections[i];
    auto positive = [&](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(where(i) + name + " must be positive");
    };
    positive(s.L0, "L0");
    positive(s.r, "r");
    positive(s.mass, "mass");
    positive(s.l_max, "l_max");
    if (!(s.sigma >= 0.0) || !std::isfinite(s.sigma)) throw ValidationError(where(i) + "sigma must be non-negative");
    if (!std::isfinite(s.gamma)) throw ValidationError(where(i) + "gamma must be finite");
    check_matrix(s.Ke, "Ke", i);
    check_matrix(s.D, "D", i);
  }
}

ArmModel parse_arm_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("arm config parse error: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("arm config must be a JSON object");

  ArmModel model;
  if (auto g = root.find("gravity"); g != root.end()) {
    if (!g->is_array() || g->size() != 3) throw ValidationError("gravity must be a 3-element array");
    for (int k = 0; k < 3; ++k) {
      if (!(*g)[k].is_number()) throw ValidationError("gravity must be numeric");
      model.gravity(k) = (*g)[k].get<double>();
    }
  }
  if (auto p = root.find("out_of_range"); p != root.end()) {
    const std::string policy = p->is_string() ? p->get<std::string>() : "";
    if (policy == "error") model.range_policy = RangePolicy::error;
    else if (policy == "clamp") model.range_policy = RangePolicy::clamp;
    else throw ValidationError("out_of_range must be \"error\" or \"clamp\"");
  }
  if (auto o = root.find("modal_order"); o != root.end()) {
    if (!o->is_number_integer()) throw ValidationError("modal_order must be an integer");
    model.modal_order = o->get<int>();
  }

  auto secs = root.find("sections");
  if (secs == root.end() || !secs->is_array()) throw ValidationError("arm config needs a sections array");
  for (int i = 0; i < static_cast<int>(secs->size()); ++i) {
    const json& js = (*secs)[i];
    if (!js.is_object()) throw ValidationError(where(i) + "must be an object");
    SectionParams s;
    s.L0 = number(js, "L0", i, true);
    s.r = number(js, "r", i, true);
    s.mass = number(js, "mass", i, true);
    s.l_max = number(js, "l_max", i, true);
    s.sigma = number(js, "sigma", i, false);
    s.gamma = number(js, "gamma", i, false);
    s.Ke = matrix(js, "Ke", i);
    s.D = matrix(js, "D", i);
    model.sections.push_back(s);
  }
  validate_model(model);
  return model;
}

ArmModel load_arm_config(const std::filesystem::path& path) {
  return parse_arm_config(read_text_file(path));
}

std::string serialize_arm_config(const ArmModel& model) {
  json root;
  root["gravity"] = {model.gravity.x(), model.gravity.y(), model.gravity.z()};
  root["out_of_range"] = model.range_policy == RangePolicy::clamp ? "clamp" : "error";
  root["modal_order"] = model.modal_order;
  json secs = json::array();
  for (const SectionParams& s : model.sections) {
    secs.push_back({{"L0", s.L0}, {"r", s.r}, {"mass", s.mass}, {"l_max", s.l_max},
                    {"sigma", s.sigma}, {"gamma", s.gamma}, {"Ke", to_json(s.Ke)}, {"D", to_json(s.D)}});
  }
  root["sections"] = std::move(secs);
  return root.dump(2) + "\n";
}

std::vector<StateViolation> validate_configuration(const ArmModel& model, const VecX& q) {
  if (q.size() != model.dof())
    throw ValidationError("joint vector has length " + std::to_string(q.size()) + ", expected " +
                          std::to_string(model.dof()));
  std::vector<StateViolation> out;
  for (int i = 0; i < model.size(); ++i) {
    for (int j = 0; j < 3; ++j) {
      const double v = q(3 * i + j);
      const double hi = model.sections[i].l_max;
      if (!(v >= 0.0 && v <= hi)) out.push_back({i + 1, j + 1, v, 0.0, hi});
    }
  }
  return out;
}

std::vector<StateViolation> validate_state(const ArmModel& model, const JointState& state) {
  if (state.qdot.size() != model.dof())
    throw ValidationError("rate vector has length " + std::to_string(state.qdot.size()) + ", expected " +
                          std::to_string(model.dof()));
  return validate_configuration(model, state.q);
}

std::string describe(const StateViolation& v) {
  std::ostringstream os;
  os << "l(" << v.section << "," << v.actuator << ") = " << v.value << " outside [" << v.lower << ", " << v.upper
     << "]";
  return os.str();
}

}  // namespace cogdyn
