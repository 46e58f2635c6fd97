#include "cogdyn/arm.hpp"

#include <sstream>

#include "cogdyn/errors.hpp"

namespace cogdyn {

Arm::Arm(ArmModel model) : Arm(std::move(model), ModalCache::global()) {}

Arm::Arm(ArmModel model, ModalCache& cache) : model_(std::move(model)) {
  validate_model(model_);
  shapes_.reserve(model_.sections.size());
  for (const SectionParams& s : model_.sections) shapes_.push_back(cache.get(s.L0, s.r, s.l_max, model_.modal_order));
}

void require_configuration(const Arm& arm, const VecX& q) {
  const auto violations = validate_configuration(arm.model(), q);
  if (!violations.empty()) throw ValidationError("configuration out of range: " + describe(violations.front()));
}

void require_state(const Arm& arm, const VecX& q, const VecX& qdot) {
  const auto violations = validate_state(arm.model(), JointState{q, qdot});
  if (!violations.empty()) throw ValidationError("configuration out of range: " + describe(violations.front()));
}

}  // namespace cogdyn
