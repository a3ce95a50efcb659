#include "tpinn/dual.hpp"

#include <string>

namespace tpinn {

Dual seed(const ad::Var& x, bool active) {
  ad::Tape& tape = x.tape();
  return Dual{x, {ad::Var(tape, active ? tape.one() : tape.zero())}};
}

Dual dual_forward(std::span<const Dual> inputs,
                  const std::function<Dual(std::span<const Dual>)>& program) {
  std::size_t seeded = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const ad::Var& t = inputs[i].tangent[0];
    if (&t.tape() != &inputs[i].primal.tape()) {
      throw SeedError("input " + std::to_string(i) + " has its tangent on a different tape");
    }
    if (is_structural_one(t)) {
      ++seeded;
    } else if (!is_structural_zero(t)) {
      throw SeedError("input " + std::to_string(i) + " tangent is neither the zero nor the unit seed");
    }
  }
  if (seeded != 1) {
    throw SeedError("exactly one input must be seeded, got " + std::to_string(seeded));
  }
  return program(inputs);
}

}  // namespace tpinn
