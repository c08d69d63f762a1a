#pragma once

// Adversary models. An attack touches the photon twice per round: once on the
// forward leg (sender -> receiver) and once on the return leg. Both touches
// act on the joint (photon x probe) state; unitary attacks contribute a single
// deterministic branch, measure-and-resend attacks contribute one branch per
// measurement outcome.

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqkd/quantum.hpp"

namespace sqkd {

inline constexpr std::size_t kDefaultProbeCap = 16;

enum class BobChoice : std::uint8_t { Ctrl, Sift };

inline std::string bob_choice_name(BobChoice c) { return c == BobChoice::Ctrl ? "CTRL" : "SIFT"; }

// One enumerable branch of an attack action: with classical probability
// `prob` the joint state becomes `state`.
struct AttackBranch {
  double prob;
  StateVector state;
};

class AttackModel {
 public:
  virtual ~AttackModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t probe_dim() const = 0;
  virtual StateVector initial_probe() const = 0;

  // Exhaustive branch decompositions, for exact analysis. Branch
  // probabilities sum to 1.
  virtual std::vector<AttackBranch> forward_branches(const StateVector& joint) const = 0;
  virtual std::vector<AttackBranch> backward_branches(const StateVector& joint) const = 0;

  // Sampled variants for Monte-Carlo sessions. A single-branch attack
  // consumes no randomness, so a trivial probe leaves the round's random
  // stream exactly as an attack-free round would.
  StateVector forward(const StateVector& joint, RandomStream& rng) const {
    return sample_branch(forward_branches(joint), rng);
  }
  StateVector backward(const StateVector& joint, RandomStream& rng) const {
    return sample_branch(backward_branches(joint), rng);
  }

  std::size_t joint_dim() const { return kPhotonDim * probe_dim(); }

 protected:
  void check_joint(const StateVector& joint) const {
    if (joint.dim() != joint_dim())
      throw DimensionMismatch("attack '" + name() + "': joint state has dimension " +
                              std::to_string(joint.dim()) + ", expected " +
                              std::to_string(joint_dim()));
  }

  static StateVector sample_branch(std::vector<AttackBranch> branches, RandomStream& rng) {
    if (branches.empty()) throw InvalidDistribution("attack produced no branches");
    if (branches.size() == 1) return std::move(branches.front().state);
    std::vector<double> probs;
    probs.reserve(branches.size());
    for (const auto& b : branches) probs.push_back(b.prob);
    return std::move(branches[sample_discrete(probs, rng)].state);
  }
};

// ---------------------------------------------------------------------------
// No adversary: trivial one-dimensional probe, identity on both legs.

class NoAttack final : public AttackModel {
 public:
  std::string name() const override { return "none"; }
  std::size_t probe_dim() const override { return 1; }
  StateVector initial_probe() const override { return StateVector::basis_state(1, 0); }
  std::vector<AttackBranch> forward_branches(const StateVector& joint) const override {
    check_joint(joint);
    return {{1.0, joint}};
  }
  std::vector<AttackBranch> backward_branches(const StateVector& joint) const override {
    check_joint(joint);
    return {{1.0, joint}};
  }
};

// ---------------------------------------------------------------------------
// Generic unitary attack: fixed probe start state, one unitary per leg.

class UnitaryPairAttack : public AttackModel {
 public:
  UnitaryPairAttack(std::string name, StateVector probe0, UnitaryMatrix forward,
                    UnitaryMatrix backward)
      : name_(std::move(name)),
        probe0_(std::move(probe0)),
        fwd_(std::move(forward)),
        bwd_(std::move(backward)) {
    if (fwd_.dim() != kPhotonDim * probe0_.dim() || bwd_.dim() != fwd_.dim())
      throw DimensionMismatch("attack '" + name_ +
                              "': leg unitaries must act on photon x probe");
  }

  std::string name() const override { return name_; }
  std::size_t probe_dim() const override { return probe0_.dim(); }
  StateVector initial_probe() const override { return probe0_; }
  std::vector<AttackBranch> forward_branches(const StateVector& joint) const override {
    check_joint(joint);
    return {{1.0, apply_unitary(fwd_, joint)}};
  }
  std::vector<AttackBranch> backward_branches(const StateVector& joint) const override {
    check_joint(joint);
    return {{1.0, apply_unitary(bwd_, joint)}};
  }

  const UnitaryMatrix& forward_unitary() const { return fwd_; }
  const UnitaryMatrix& backward_unitary() const { return bwd_; }

 private:
  std::string name_;
  StateVector probe0_;
  UnitaryMatrix fwd_;
  UnitaryMatrix bwd_;
};

// ---------------------------------------------------------------------------
// Double CNOT: one CNOT per degree of freedom with the photon as control and
// a 4-dimensional probe photon (prepared as Hb1) as target, applied on both
// legs. The second application XORs the same label again, so the probe
// always returns to Hb1.

inline UnitaryMatrix dcnot_unitary() {
  // |p> |e>  ->  |p> |e xor p>, with labels as 2-bit words (pol, spat)
  constexpr std::size_t d = kPhotonDim * kPhotonDim;
  std::vector<cx> m(d * d, cx{0, 0});
  for (std::size_t p = 0; p < kPhotonDim; ++p)
    for (std::size_t e = 0; e < kPhotonDim; ++e)
      m[(p * kPhotonDim + (e ^ p)) * d + (p * kPhotonDim + e)] = cx{1, 0};
  return UnitaryMatrix(d, std::move(m));
}

class DoubleCnotAttack final : public UnitaryPairAttack {
 public:
  DoubleCnotAttack()
      : UnitaryPairAttack("double-cnot", StateVector::basis_state(kPhotonDim, 0), dcnot_unitary(),
                          dcnot_unitary()) {}
};

// ---------------------------------------------------------------------------
// Entangling rotation family: a two-qubit probe starts as |00>; the photon's
// polarization Z-bit controls a rotation by theta_p on probe qubit 1 and the
// spatial Z-bit controls a rotation by theta_s on probe qubit 2. Applied on
// the forward leg only (identity return). theta = 0 on both knobs is
// branch-for-branch the identity channel.

inline UnitaryMatrix entangling_rotation_unitary(double theta_p, double theta_s) {
  auto rot = [](double t) {
    return std::vector<cx>{cx{std::cos(t), 0}, cx{-std::sin(t), 0}, cx{std::sin(t), 0},
                           cx{std::cos(t), 0}};
  };
  const std::vector<cx> id2{cx{1, 0}, cx{0, 0}, cx{0, 0}, cx{1, 0}};
  constexpr std::size_t d = kPhotonDim * kPhotonDim;
  std::vector<cx> m(d * d, cx{0, 0});
  for (std::size_t p = 0; p < kPhotonDim; ++p) {
    const auto bp = pol_index(static_cast<int>(p)) ? rot(theta_p) : id2;
    const auto bs = spat_index(static_cast<int>(p)) ? rot(theta_s) : id2;
    const auto block = kron_entries(bp, 2, bs, 2);  // 4x4 action on the probe
    for (std::size_t e1 = 0; e1 < kPhotonDim; ++e1)
      for (std::size_t e2 = 0; e2 < kPhotonDim; ++e2)
        m[(p * kPhotonDim + e1) * d + (p * kPhotonDim + e2)] = block[e1 * kPhotonDim + e2];
  }
  return UnitaryMatrix(d, std::move(m));
}

class EntangleMeasureAttack final : public UnitaryPairAttack {
 public:
  EntangleMeasureAttack(double theta_p, double theta_s)
      : UnitaryPairAttack("rotation", StateVector::basis_state(kPhotonDim, 0),
                          entangling_rotation_unitary(theta_p, theta_s),
                          UnitaryMatrix::identity(kPhotonDim * kPhotonDim)),
        theta_p_(theta_p),
        theta_s_(theta_s) {}

  double theta_p() const { return theta_p_; }
  double theta_s() const { return theta_s_; }

 private:
  double theta_p_;
  double theta_s_;
};

// ---------------------------------------------------------------------------
// Intercept-resend: measure the photon in a fixed basis on the forward leg,
// resend the observed basis state, and keep the outcome in a classical
// 4-outcome register (modeled as 4 orthogonal probe states). The return leg
// is untouched.

class InterceptResendAttack final : public AttackModel {
 public:
  explicit InterceptResendAttack(ProductBasis basis = kBasisZZ) : basis_(basis) {}

  std::string name() const override { return "intercept-resend(" + basis_name(basis_) + ")"; }
  std::size_t probe_dim() const override { return 4; }
  StateVector initial_probe() const override { return StateVector::basis_state(4, 0); }

  std::vector<AttackBranch> forward_branches(const StateVector& joint) const override {
    check_joint(joint);
    const auto vs = basis_vectors(basis_);
    std::vector<AttackBranch> out;
    for (int m = 0; m < 4; ++m) {
      auto r = photon_collapse(joint, basis_, m);
      if (!r) continue;
      out.push_back({r->probability, tensor(vs[m], StateVector::basis_state(4, m))});
    }
    return out;
  }

  std::vector<AttackBranch> backward_branches(const StateVector& joint) const override {
    check_joint(joint);
    return {{1.0, joint}};
  }

  ProductBasis basis() const { return basis_; }

 private:
  ProductBasis basis_;
};

// ---------------------------------------------------------------------------
// Exact single-round enumeration: every (attack branch, receiver outcome,
// attack branch, sender outcome) path of one protocol round, with its
// probability and final joint state. This is the workhorse behind exact
// detection rates and conditional probe states.

struct RoundBranch {
  double prob;
  int bob_label;    // -1 on CTRL rounds (no measurement at Bob)
  int alice_label;  // sender's return-leg outcome
  StateVector state;
};

inline std::vector<RoundBranch> enumerate_round(const AttackModel& attack, ProductBasis prepared,
                                                int label, BobChoice choice) {
  const StateVector psi0 = tensor(basis_vectors(prepared)[label], attack.initial_probe());
  std::vector<RoundBranch> out;
  for (const AttackBranch& f : attack.forward_branches(psi0)) {
    // Bob: either reflect untouched (CTRL) or measure in (Zp,Zs) and resend
    // the collapsed state (SIFT)
    std::vector<std::pair<double, StateVector>> mids;
    std::vector<int> bob_labels;
    if (choice == BobChoice::Ctrl) {
      mids.emplace_back(1.0, f.state);
      bob_labels.push_back(-1);
    } else {
      for (int m = 0; m < 4; ++m) {
        auto r = photon_collapse(f.state, kBasisZZ, m);
        if (!r) continue;
        mids.emplace_back(r->probability, std::move(r->post_state));
        bob_labels.push_back(m);
      }
    }
    const ProductBasis alice_basis = (choice == BobChoice::Ctrl) ? prepared : kBasisZZ;
    for (std::size_t mi = 0; mi < mids.size(); ++mi) {
      for (const AttackBranch& b : attack.backward_branches(mids[mi].second)) {
        for (int alab = 0; alab < 4; ++alab) {
          auto r = photon_collapse(b.state, alice_basis, alab);
          if (!r) continue;
          out.push_back({f.prob * mids[mi].first * b.prob * r->probability, bob_labels[mi], alab,
                         std::move(r->post_state)});
        }
      }
    }
  }
  return out;
}

// Probe marginal at the end of a round, conditioned on the prepared (Zp,Zs)
// label and Bob's choice, averaged over all measurement outcomes.
inline DensityMatrix conditional_probe_state(const AttackModel& attack, int label,
                                             BobChoice choice) {
  const std::size_t pd = attack.probe_dim();
  std::vector<cx> acc(pd * pd, cx{0, 0});
  for (const RoundBranch& br : enumerate_round(attack, kBasisZZ, label, choice)) {
    const DensityMatrix rho = probe_state(br.state);
    for (std::size_t i = 0; i < pd * pd; ++i) acc[i] += br.prob * rho.entries()[i];
  }
  return DensityMatrix(pd, std::move(acc));
}

// The four key-round probe states (SIFT-conditioned), indexed by the
// prepared (Zp,Zs) label. These are what the adversary would distinguish to
// learn key bits.
inline std::array<DensityMatrix, 4> key_probe_states(const AttackModel& attack) {
  return {conditional_probe_state(attack, 0, BobChoice::Sift),
          conditional_probe_state(attack, 1, BobChoice::Sift),
          conditional_probe_state(attack, 2, BobChoice::Sift),
          conditional_probe_state(attack, 3, BobChoice::Sift)};
}

}  // namespace sqkd
