// Adversary-model tests. Detection and information figures are checked
// against independent oracles built from raw inner products, so any error in
// the branch-enumeration machinery cannot hide itself.

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"

#include "sqkd/sqkd.hpp"

using sqkd::BobChoice;
using sqkd::StateVector;

namespace {

// --- independent oracles (inner products only, no branch enumeration) ------

// Measure-resend in `eve_basis` on the forward leg, reflection at the
// receiver, identity return leg: the sender re-measures in the preparation
// basis, so detection = 1 - sum_m |<v_m|psi>|^4.
double oracle_ir_ctrl_detection(sqkd::ProductBasis eve_basis, sqkd::ProductBasis prepared,
                                int label) {
  const StateVector psi = sqkd::basis_vectors(prepared)[label];
  const auto vs = sqkd::basis_vectors(eve_basis);
  double sum = 0.0;
  for (int m = 0; m < 4; ++m) {
    const double p = std::norm(sqkd::inner(vs[m], psi));
    sum += p * p;
  }
  return 1.0 - sum;
}

// Same attack on a SIFT round: the resent eigenstate is measured by the
// receiver in (Zp,Zs) and passed on unchanged, so receiver and sender always
// agree; the error indicator reduces to the shared round predicate on that
// common outcome.
double oracle_ir_sift_detection(sqkd::ProductBasis eve_basis, sqkd::ProductBasis prepared,
                                int label) {
  const StateVector psi = sqkd::basis_vectors(prepared)[label];
  const auto vs = sqkd::basis_vectors(eve_basis);
  const auto zs = sqkd::basis_vectors(sqkd::kBasisZZ);
  double detect = 0.0;
  for (int m = 0; m < 4; ++m) {
    const double pm = std::norm(sqkd::inner(vs[m], psi));
    for (int k = 0; k < 4; ++k) {
      const double qk = std::norm(sqkd::inner(zs[k], vs[m]));
      if (sqkd::round_error(prepared, label, BobChoice::Sift, k, k)) detect += pm * qk;
    }
  }
  return detect;
}

// Forward-leg unitary attack observed on a CTRL round: project the evolved
// joint state back onto (prepared photon state) x (anything).
double oracle_unitary_ctrl_detection(const sqkd::UnitaryMatrix& u, const StateVector& probe0,
                                     sqkd::ProductBasis prepared, int label) {
  const StateVector psi = sqkd::basis_vectors(prepared)[label];
  const StateVector evolved = sqkd::apply_unitary(u, sqkd::tensor(psi, probe0));
  double keep = 0.0;
  for (std::size_t k = 0; k < probe0.dim(); ++k)
    keep += std::norm(sqkd::inner(sqkd::tensor(psi, StateVector::basis_state(probe0.dim(), k)),
                                  evolved));
  return 1.0 - keep;
}

sqkd::json identity_matrix_json(std::size_t dim) {
  sqkd::json rows = sqkd::json::array();
  for (std::size_t i = 0; i < dim; ++i) {
    sqkd::json row = sqkd::json::array();
    for (std::size_t j = 0; j < dim; ++j)
      row.push_back(sqkd::json::array({i == j ? 1.0 : 0.0, 0.0}));
    rows.push_back(row);
  }
  return rows;
}

sqkd::json matrix_json(const sqkd::UnitaryMatrix& u) {
  sqkd::json rows = sqkd::json::array();
  for (std::size_t i = 0; i < u.dim(); ++i) {
    sqkd::json row = sqkd::json::array();
    for (std::size_t j = 0; j < u.dim(); ++j) {
      const sqkd::cx e = u.entries()[i * u.dim() + j];
      row.push_back(sqkd::json::array({e.real(), e.imag()}));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("the double-CNOT unitary XORs the photon label into the probe", "[attacks]") {
  const auto u = sqkd::dcnot_unitary();
  REQUIRE(u.dim() == 16);
  for (std::size_t p = 0; p < 4; ++p)
    for (std::size_t e = 0; e < 4; ++e) {
      const auto out = sqkd::apply_unitary(u, StateVector::basis_state(16, p * 4 + e));
      const auto expect = StateVector::basis_state(16, p * 4 + (e ^ p));
      REQUIRE(std::abs(std::abs(sqkd::inner(expect, out)) - 1.0) < 1e-14);
    }
}

TEST_CASE("double CNOT on both legs is invisible and learns nothing", "[attacks]") {
  const sqkd::DoubleCnotAttack attack;
  const StateVector e0 = StateVector::basis_state(4, 0);
  for (sqkd::ProductBasis b : sqkd::kAllBases)
    for (int label = 0; label < 4; ++label)
      for (BobChoice choice : {BobChoice::Ctrl, BobChoice::Sift}) {
        REQUIRE(sqkd::cell_error_probability(attack, b, label, choice) < 1e-14);
        // the second XOR returns the probe to its start state on every branch
        for (const auto& br : sqkd::enumerate_round(attack, b, label, choice))
          REQUIRE(sqkd::fidelity_with_pure(sqkd::probe_state(br.state), e0) > 1.0 - 1e-12);
      }
  const auto metrics = sqkd::probe_metrics(attack);
  REQUIRE(metrics.probe_dim == 4);
  REQUIRE(metrics.holevo_bits < 1e-12);
  REQUIRE(metrics.max_trace_distance < 1e-10);
}

TEST_CASE("intercept-resend detection matches the inner-product oracle", "[attacks]") {
  for (sqkd::ProductBasis eve_basis : {sqkd::kBasisZZ, sqkd::kBasisXX, sqkd::kBasisZX}) {
    const sqkd::InterceptResendAttack attack(eve_basis);
    for (sqkd::ProductBasis b : sqkd::kAllBases)
      for (int label = 0; label < 4; ++label) {
        const double ctrl = sqkd::cell_error_probability(attack, b, label, BobChoice::Ctrl);
        const double sift = sqkd::cell_error_probability(attack, b, label, BobChoice::Sift);
        REQUIRE(std::abs(ctrl - oracle_ir_ctrl_detection(eve_basis, b, label)) < 1e-12);
        REQUIRE(std::abs(sift - oracle_ir_sift_detection(eve_basis, b, label)) < 1e-12);
      }
  }

  // the (Zp,Zs)-basis attack has clean closed-form CTRL cells: silent on
  // (Zp,Zs), one random degree of freedom costs 1/2, two cost 3/4
  const sqkd::InterceptResendAttack zz;
  for (int label = 0; label < 4; ++label) {
    REQUIRE(sqkd::cell_error_probability(zz, sqkd::kBasisZZ, label, BobChoice::Ctrl) == 0.0);
    REQUIRE(std::abs(sqkd::cell_error_probability(zz, sqkd::kBasisZX, label, BobChoice::Ctrl) -
                     0.5) < 1e-12);
    REQUIRE(std::abs(sqkd::cell_error_probability(zz, sqkd::kBasisXZ, label, BobChoice::Ctrl) -
                     0.5) < 1e-12);
    REQUIRE(std::abs(sqkd::cell_error_probability(zz, sqkd::kBasisXX, label, BobChoice::Ctrl) -
                     0.75) < 1e-12);
    // it never trips the (Zp,Zs) SIFT comparison
    REQUIRE(sqkd::cell_error_probability(zz, sqkd::kBasisZZ, label, BobChoice::Sift) == 0.0);
  }
}

TEST_CASE("intercept-resend in (Zp,Zs) copies the key labels into the probe", "[attacks]") {
  const sqkd::InterceptResendAttack attack;
  for (int label = 0; label < 4; ++label) {
    const auto sift = sqkd::conditional_probe_state(attack, label, BobChoice::Sift);
    const auto ctrl = sqkd::conditional_probe_state(attack, label, BobChoice::Ctrl);
    const StateVector reg = StateVector::basis_state(4, label);
    REQUIRE(sqkd::fidelity_with_pure(sift, reg) > 1.0 - 1e-12);
    REQUIRE(sqkd::fidelity_with_pure(ctrl, reg) > 1.0 - 1e-12);
  }
  // a perfect classical copy: orthogonal probe states, two full bits
  const auto metrics = sqkd::probe_metrics(attack);
  REQUIRE(std::abs(metrics.holevo_bits - 2.0) < 1e-9);
  REQUIRE(std::abs(metrics.max_trace_distance - 1.0) < 1e-9);
}

TEST_CASE("entangling rotations disturb exactly the X-prepared cells", "[attacks]") {
  const double pi = std::acos(-1.0);
  for (auto [tp, ts] : {std::pair{0.7, 0.0}, {0.0, 0.4}, {0.7, 0.4}, {pi / 2, pi / 2}}) {
    const sqkd::EntangleMeasureAttack attack(tp, ts);
    const double sp = std::sin(tp / 2) * std::sin(tp / 2);
    const double ss = std::sin(ts / 2) * std::sin(ts / 2);
    for (int label = 0; label < 4; ++label) {
      const auto cell = [&](sqkd::ProductBasis b) {
        return sqkd::cell_error_probability(attack, b, label, BobChoice::Ctrl);
      };
      REQUIRE(cell(sqkd::kBasisZZ) < 1e-14);
      REQUIRE(std::abs(cell(sqkd::kBasisXZ) - sp) < 1e-12);
      REQUIRE(std::abs(cell(sqkd::kBasisZX) - ss) < 1e-12);
      REQUIRE(std::abs(cell(sqkd::kBasisXX) - (sp + ss - sp * ss)) < 1e-12);
      // the rotations commute with (Zp,Zs) measurements: SIFT rounds stay clean
      for (sqkd::ProductBasis b : sqkd::kAllBases)
        REQUIRE(sqkd::cell_error_probability(attack, b, label, BobChoice::Sift) < 1e-14);
    }
    // cross-check the enumeration against a direct projection of U(psi x e0)
    for (sqkd::ProductBasis b : sqkd::kAllBases)
      for (int label = 0; label < 4; ++label) {
        const double direct = oracle_unitary_ctrl_detection(
            sqkd::entangling_rotation_unitary(tp, ts), StateVector::basis_state(4, 0), b, label);
        REQUIRE(std::abs(sqkd::cell_error_probability(attack, b, label, BobChoice::Ctrl) -
                         direct) < 1e-12);
      }
  }
}

TEST_CASE("a zero-angle rotation attack reproduces the attack-free session bit for bit",
          "[attacks]") {
  sqkd::ProtocolParams params;
  params.n = 64;
  params.delta = 0.3;
  const sqkd::NoAttack none;
  const sqkd::EntangleMeasureAttack zero(0.0, 0.0);
  for (params.seed = 7;; ++params.seed) {
    REQUIRE(params.seed < 7 + 64);
    try {
      const auto a = sqkd::run_session(params, none);
      const auto b = sqkd::run_session(params, zero);
      REQUIRE(a.keys->alice == b.keys->alice);
      REQUIRE(a.keys->bob == b.keys->bob);
      REQUIRE(a.transcript.size() == b.transcript.size());
      for (std::size_t i = 0; i < a.transcript.size(); ++i) {
        REQUIRE(a.transcript[i].bob.kind == b.transcript[i].bob.kind);
        REQUIRE(a.transcript[i].bob.label == b.transcript[i].bob.label);
        REQUIRE(a.transcript[i].alice_label == b.transcript[i].alice_label);
        REQUIRE(a.transcript[i].group == b.transcript[i].group);
      }
      break;
    } catch (const sqkd::InsufficientRounds&) {
      // both sessions share the seed, so a shortfall hits them identically
      REQUIRE_THROWS_AS(sqkd::run_session(params, zero), sqkd::InsufficientRounds);
    }
  }
}

TEST_CASE("attack maps preserve the joint norm on random inputs", "[attacks]") {
  const sqkd::NoAttack none;
  const sqkd::DoubleCnotAttack dcnot;
  const sqkd::InterceptResendAttack ir;
  const sqkd::EntangleMeasureAttack rot(0.7, 0.3);
  const std::vector<const sqkd::AttackModel*> attacks{&none, &dcnot, &ir, &rot};
  sqkd::RandomStream rng(31);
  for (const sqkd::AttackModel* attack : attacks)
    for (int rep = 0; rep < 250; ++rep) {
      const StateVector joint = sqkd::haar_random_state(attack->joint_dim(), rng);
      for (const StateVector& out :
           {attack->forward(joint, rng), attack->backward(joint, rng)}) {
        double n2 = 0.0;
        for (std::size_t i = 0; i < out.dim(); ++i) n2 += std::norm(out[i]);
        REQUIRE(std::abs(n2 - 1.0) < 1e-10);
      }
    }
}

TEST_CASE("double CNOT entangles superposed photons with its probe", "[attacks]") {
  // the (Xp,Zs) "plus" state: (|H b1> + |V b1>)/sqrt(2), probe at |H b1>
  const sqkd::DoubleCnotAttack attack;
  const StateVector photon = sqkd::basis_vectors(sqkd::kBasisXZ)[0];
  const StateVector joint = sqkd::tensor(photon, attack.initial_probe());
  const auto branches = attack.forward_branches(joint);
  REQUIRE(branches.size() == 1);
  // expected: (|H b1>|H b1> + |V b1>|V b1>)/sqrt(2) = (e_0 + e_{10})/sqrt(2)
  std::vector<sqkd::cx> amps(16, sqkd::cx{0, 0});
  amps[0 * 4 + 0] = sqkd::cx{1.0 / std::sqrt(2.0), 0};
  amps[2 * 4 + 2] = sqkd::cx{1.0 / std::sqrt(2.0), 0};
  const StateVector expected{std::move(amps)};
  REQUIRE(std::abs(std::abs(sqkd::inner(expected, branches[0].state)) - 1.0) < 1e-12);
}

TEST_CASE("a quarter-turn rotation makes H- and V-conditioned probes orthogonal", "[attacks]") {
  const double pi = std::acos(-1.0);
  const sqkd::EntangleMeasureAttack attack(pi / 2, 0.0);
  const auto probes = sqkd::key_probe_states(attack);
  // labels 0,1 share polarization H; labels 2,3 share V
  REQUIRE(sqkd::trace_distance(probes[0], probes[1]) < 1e-12);
  REQUIRE(sqkd::trace_distance(probes[2], probes[3]) < 1e-12);
  REQUIRE(std::abs(sqkd::trace_distance(probes[0], probes[2]) - 1.0) < 1e-12);
  REQUIRE(sqkd::fidelity_with_pure(probes[0], sqkd::StateVector::basis_state(4, 0)) >
          1.0 - 1e-12);
}

TEST_CASE("round enumeration yields normalized probability distributions", "[attacks]") {
  const sqkd::NoAttack none;
  const sqkd::DoubleCnotAttack dcnot;
  const sqkd::InterceptResendAttack ir_zz;
  const sqkd::InterceptResendAttack ir_xx(sqkd::kBasisXX);
  const sqkd::EntangleMeasureAttack rot(0.7, 0.3);
  const std::vector<const sqkd::AttackModel*> attacks{&none, &dcnot, &ir_zz, &ir_xx, &rot};
  for (const sqkd::AttackModel* attack : attacks)
    for (sqkd::ProductBasis b : sqkd::kAllBases)
      for (int label = 0; label < 4; ++label)
        for (BobChoice choice : {BobChoice::Ctrl, BobChoice::Sift}) {
          double total = 0.0;
          for (const auto& br : sqkd::enumerate_round(*attack, b, label, choice)) {
            REQUIRE(br.prob > 0.0);
            REQUIRE(br.state.dim() == attack->joint_dim());
            REQUIRE((choice == BobChoice::Ctrl) == (br.bob_label == -1));
            REQUIRE(br.alice_label >= 0);
            REQUIRE(br.alice_label <= 3);
            total += br.prob;
          }
          REQUIRE(std::abs(total - 1.0) < 1e-12);
        }
}

TEST_CASE("attack files load, validate and behave like their built-in twins", "[attacks]") {
  // a probe-less identity attack is exactly the honest channel
  sqkd::json trivial = {{"probe_dim", 1}, {"forward", identity_matrix_json(4)}};
  const auto loaded = sqkd::load_attack(trivial, "trivial");
  REQUIRE(loaded->name() == "trivial");
  REQUIRE(loaded->probe_dim() == 1);
  const auto rates = sqkd::expected_error_rates(*loaded);
  REQUIRE(rates == std::array<double, 3>{0.0, 0.0, 0.0});

  // a file carrying the double-CNOT matrices matches the built-in attack
  sqkd::json dcnot_json = {{"probe_dim", 4},
                           {"forward", matrix_json(sqkd::dcnot_unitary())},
                           {"backward", matrix_json(sqkd::dcnot_unitary())},
                           {"name", "dcnot-twin"}};
  const auto twin = sqkd::load_attack(dcnot_json, "ignored");
  REQUIRE(twin->name() == "dcnot-twin");
  const auto twin_metrics = sqkd::probe_metrics(*twin);
  REQUIRE(twin_metrics.holevo_bits < 1e-12);
  REQUIRE(twin_metrics.max_trace_distance < 1e-10);
  for (sqkd::ProductBasis b : sqkd::kAllBases)
    for (int label = 0; label < 4; ++label)
      for (BobChoice choice : {BobChoice::Ctrl, BobChoice::Sift})
        REQUIRE(sqkd::cell_error_probability(*twin, b, label, choice) < 1e-14);

  // loading from disk picks the file stem as the default name
  const auto path = std::filesystem::temp_directory_path() / "stem-name.json";
  std::ofstream(path) << sqkd::json{{"probe_dim", 1}, {"forward", identity_matrix_json(4)}};
  const auto from_disk = sqkd::load_attack_file(path);
  REQUIRE(from_disk->name() == "stem-name");
  std::filesystem::remove(path);

  // a custom initial probe is accepted and normalized
  const double r = 1.0 / std::sqrt(2.0);
  sqkd::json with_probe = {{"probe_dim", 2},
                           {"forward", identity_matrix_json(8)},
                           {"initial_probe", sqkd::json::array({sqkd::json::array({r, 0.0}),
                                                                sqkd::json::array({0.0, r})})}};
  const auto probed = sqkd::load_attack(with_probe, "probed");
  REQUIRE(probed->probe_dim() == 2);
  REQUIRE(std::abs(std::abs(probed->initial_probe()[0]) - r) < 1e-12);
  REQUIRE(std::abs(std::abs(probed->initial_probe()[1]) - r) < 1e-12);
}

TEST_CASE("malformed attack files are rejected with specific messages", "[attacks]") {
  using Catch::Matchers::ContainsSubstring;

  auto load = [](sqkd::json j) { return sqkd::load_attack(std::move(j), "bad"); };

  REQUIRE_THROWS_MATCHES(load(sqkd::json::array()), sqkd::AttackFileError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("JSON object")));
  REQUIRE_THROWS_MATCHES(load({{"forward", identity_matrix_json(4)}}), sqkd::AttackFileError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("probe_dim")));
  REQUIRE_THROWS_MATCHES(load({{"probe_dim", 1}}), sqkd::AttackFileError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("forward")));
  REQUIRE_THROWS_MATCHES(load({{"probe_dim", 0}, {"forward", identity_matrix_json(4)}}),
                         sqkd::AttackFileError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("probe_dim")));
  REQUIRE_THROWS_MATCHES(load({{"probe_dim", 99}, {"forward", identity_matrix_json(4)}}),
                         sqkd::AttackFileError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("[1, 16]")));

  // wrong shape: 4 rows expected for probe_dim 1
  REQUIRE_THROWS_MATCHES(load({{"probe_dim", 1}, {"forward", identity_matrix_json(8)}}),
                         sqkd::AttackFileError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("expected 4 rows")));

  // non-unitary matrix: message pins down the worst Gram entry
  sqkd::json shrunk = identity_matrix_json(4);
  shrunk[0][0][0] = 0.5;
  REQUIRE_THROWS_MATCHES(load({{"probe_dim", 1}, {"forward", shrunk}}), sqkd::AttackFileError,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("forward matrix is not unitary: |(U^dag U - I)[0][0]|")));

  // entries must be [re, im] pairs of finite numbers
  sqkd::json text = identity_matrix_json(4);
  text[1][1] = "one";
  REQUIRE_THROWS_MATCHES(load({{"probe_dim", 1}, {"forward", text}}), sqkd::AttackFileError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("[re, im]")));

  // initial probe: wrong length, then an unnormalized vector
  REQUIRE_THROWS_MATCHES(
      load({{"probe_dim", 2},
            {"forward", identity_matrix_json(8)},
            {"initial_probe", sqkd::json::array({sqkd::json::array({1.0, 0.0})})}}),
      sqkd::AttackFileError,
      Catch::Matchers::MessageMatches(ContainsSubstring("probe_dim entries")));
  REQUIRE_THROWS_MATCHES(
      load({{"probe_dim", 1},
            {"forward", identity_matrix_json(4)},
            {"initial_probe", sqkd::json::array({sqkd::json::array({0.5, 0.0})})}}),
      sqkd::AttackFileError,
      Catch::Matchers::MessageMatches(ContainsSubstring("norm")));

  // unreadable path and invalid JSON text
  REQUIRE_THROWS_MATCHES(sqkd::load_attack_file("/nonexistent/missing.json"),
                         sqkd::AttackFileError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("cannot open")));
  const auto path = std::filesystem::temp_directory_path() / "broken-attack.json";
  std::ofstream(path) << "{ not json";
  REQUIRE_THROWS_MATCHES(sqkd::load_attack_file(path), sqkd::AttackFileError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("invalid JSON")));
  std::filesystem::remove(path);
}
