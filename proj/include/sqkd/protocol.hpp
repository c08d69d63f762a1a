#pragma once

// The key-distribution protocol round trip.
//
// The sender prepares single photons in one of the four product bases
// (heavily weighted toward (Zp,Zs)); the classical receiver either reflects a
// photon untouched (CTRL) or measures it in (Zp,Zs), records the outcome and
// sends the collapsed state back (SIFT). The sender measures every returned
// photon: CTRL rounds in the preparation basis, SIFT rounds in (Zp,Zs).
// Security checking compares three disjoint round groups; surviving (Zp,Zs)
// SIFT rounds carry the raw key, two bits per photon.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqkd/attack.hpp"
#include "sqkd/quantum.hpp"
#include "sqkd/random.hpp"

namespace sqkd {

enum class SessionMode : std::uint8_t { Exact, MonteCarlo };
enum class Verdict : std::uint8_t { Accept, Abort };

inline std::string session_mode_name(SessionMode m) {
  return m == SessionMode::Exact ? "exact" : "monte-carlo";
}
inline std::string verdict_name(Verdict v) { return v == Verdict::Accept ? "Accept" : "Abort"; }

struct ProtocolParams {
  int n = 128;          // raw key length in bits; must be even and positive
  double delta = 0.1;   // oversampling margin
  double ctrl_threshold = 0.0;
  double non_zz_sift_threshold = 0.0;
  double zz_sift_threshold = 0.0;
  std::uint64_t seed = 1;
  SessionMode mode = SessionMode::MonteCarlo;

  void validate() const {
    if (n <= 0 || n % 2 != 0)
      throw DimensionMismatch("params: n must be a positive even integer, got " +
                              std::to_string(n));
    if (!(delta >= 0.0) || !std::isfinite(delta))
      throw DimensionMismatch("params: delta must be a finite nonnegative number");
    for (double t : {ctrl_threshold, non_zz_sift_threshold, zz_sift_threshold})
      if (!(t >= 0.0 && t <= 1.0))
        throw DimensionMismatch("params: error thresholds must lie in [0, 1]");
  }
};

// Round-half-up, the convention for all photon-count formulas.
inline long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

inline long scaled_count(double coeff, const ProtocolParams& p) {
  return round_half_up(coeff * static_cast<double>(p.n) * (1.0 + p.delta));
}

// ---------------------------------------------------------------------------
// Step 1: batch preparation

struct PreparedPhoton {
  std::size_t index = 0;  // transmission position
  ProductBasis basis;
  int label = 0;  // 0..3 within the basis

  StateVector state() const { return basis_vectors(basis)[label]; }
};

// 1.5n(1+delta) photons in (Zp,Zs) and 0.5n(1+delta) in each other basis,
// labels uniform, transmission order shuffled. All counts round half up.
inline std::vector<PreparedPhoton> prepare_batch(const ProtocolParams& params, RandomStream& rng) {
  params.validate();
  std::vector<PreparedPhoton> photons;
  for (ProductBasis b : kAllBases) {
    const long count = scaled_count(b == kBasisZZ ? 1.5 : 0.5, params);
    for (long i = 0; i < count; ++i)
      photons.push_back({0, b, static_cast<int>(rng.next_index(4))});
  }
  rng.shuffle(photons);
  for (std::size_t i = 0; i < photons.size(); ++i) photons[i].index = i;
  return photons;
}

// ---------------------------------------------------------------------------
// Step 2: receiver and sender actions on one photon

struct BobAction {
  BobChoice kind = BobChoice::Ctrl;
  int label = -1;  // measured (Zp,Zs) label, only meaningful for SIFT
};

// Fair coin between CTRL (reflect untouched) and SIFT (measure in (Zp,Zs),
// record, send the collapsed state onward).
inline std::pair<BobAction, StateVector> bob_step(const StateVector& joint, RandomStream& rng) {
  if (rng.next_bool()) {
    MeasurementResult r = measure(joint, kBasisZZ, rng);
    return {BobAction{BobChoice::Sift, r.outcome}, std::move(r.post_state)};
  }
  return {BobAction{BobChoice::Ctrl, -1}, joint};
}

// Return-leg measurement: preparation basis for CTRL rounds, (Zp,Zs) for
// SIFT rounds.
inline MeasurementResult alice_return_measurement(const StateVector& joint, ProductBasis prepared,
                                                  BobChoice choice, RandomStream& rng) {
  return measure(joint, choice == BobChoice::Ctrl ? prepared : kBasisZZ, rng);
}

// ---------------------------------------------------------------------------
// Step 3: security checking

enum class CheckGroup : std::uint8_t { CtrlCheck, NonZZSiftCheck, ZZSiftCheck, KeyCandidate };

inline std::string check_group_name(CheckGroup g) {
  switch (g) {
    case CheckGroup::CtrlCheck: return "CtrlCheck";
    case CheckGroup::NonZZSiftCheck: return "NonZZSiftCheck";
    case CheckGroup::ZZSiftCheck: return "ZZSiftCheck";
    default: return "KeyCandidate";
  }
}

struct RoundRecord {
  PreparedPhoton photon;
  BobAction bob;
  int alice_label = -1;
  CheckGroup group = CheckGroup::KeyCandidate;
  bool error = false;
};

// The error predicate shared by the sampled transcript scoring and the exact
// rate enumeration, so the two code paths cannot diverge.
//
//  - CTRL: the reflected photon must come back exactly as prepared.
//  - SIFT, prepared in (Zp,Zs): receiver and sender must both see the
//    prepared label.
//  - SIFT, other bases: receiver and sender must agree, and on any degree of
//    freedom that was prepared in its Z basis the receiver must also match
//    the preparation (the X-prepared degree of freedom is genuinely random).
inline bool round_error(ProductBasis prepared_basis, int prepared_label, BobChoice choice,
                        int bob_label, int alice_label) {
  if (choice == BobChoice::Ctrl) return alice_label != prepared_label;
  if (prepared_basis == kBasisZZ)
    return bob_label != prepared_label || bob_label != alice_label;
  if (bob_label != alice_label) return true;
  if (prepared_basis.pol == PolBasis::Zp && pol_index(bob_label) != pol_index(prepared_label))
    return true;
  if (prepared_basis.spat == SpatBasis::Zs && spat_index(bob_label) != spat_index(prepared_label))
    return true;
  return false;
}

struct GroupStats {
  long comparisons = 0;
  long errors = 0;
  double rate() const { return comparisons > 0 ? static_cast<double>(errors) / comparisons : 0.0; }
};

struct ErrorReport {
  GroupStats ctrl;
  GroupStats non_zz_sift;
  GroupStats zz_sift;
  Verdict verdict = Verdict::Accept;
};

// Classify every round, flag errors, and compare the three group error rates
// against their thresholds. Throws InsufficientRounds when the (Zp,Zs) SIFT
// pool cannot fill both the check subset and n/2 key photons; the fix is a
// larger delta.
inline ErrorReport run_security_check(std::vector<RoundRecord>& records,
                                      const ProtocolParams& params, RandomStream& rng) {
  const long check_count = scaled_count(0.25, params);
  const long key_photons = params.n / 2;

  std::vector<std::size_t> zz_sift_pool;
  for (std::size_t i = 0; i < records.size(); ++i) {
    RoundRecord& r = records[i];
    if (r.bob.kind == BobChoice::Ctrl) {
      r.group = CheckGroup::CtrlCheck;
    } else if (r.photon.basis == kBasisZZ) {
      r.group = CheckGroup::KeyCandidate;  // check subset drawn below
      zz_sift_pool.push_back(i);
      continue;
    } else {
      r.group = CheckGroup::NonZZSiftCheck;
    }
    r.error = round_error(r.photon.basis, r.photon.label, r.bob.kind, r.bob.label, r.alice_label);
  }

  if (static_cast<long>(zz_sift_pool.size()) < check_count + key_photons)
    throw InsufficientRounds(
        "only " + std::to_string(zz_sift_pool.size()) + " (Zp,Zs) SIFT rounds available, but " +
        std::to_string(check_count) + " check rounds plus " + std::to_string(key_photons) +
        " key photons are required; rerun with a larger delta");

  // uniform random check subset of the (Zp,Zs) SIFT pool
  std::vector<std::size_t> pool = zz_sift_pool;
  rng.shuffle(pool);
  for (long k = 0; k < check_count; ++k) {
    RoundRecord& r = records[pool[k]];
    r.group = CheckGroup::ZZSiftCheck;
    r.error = round_error(r.photon.basis, r.photon.label, r.bob.kind, r.bob.label, r.alice_label);
  }

  ErrorReport report;
  for (const RoundRecord& r : records) {
    GroupStats* g = nullptr;
    if (r.group == CheckGroup::CtrlCheck) g = &report.ctrl;
    else if (r.group == CheckGroup::NonZZSiftCheck) g = &report.non_zz_sift;
    else if (r.group == CheckGroup::ZZSiftCheck) g = &report.zz_sift;
    if (!g) continue;
    g->comparisons += 1;
    g->errors += r.error ? 1 : 0;
  }
  const bool abort = report.ctrl.rate() > params.ctrl_threshold ||
                     report.non_zz_sift.rate() > params.non_zz_sift_threshold ||
                     report.zz_sift.rate() > params.zz_sift_threshold;
  report.verdict = abort ? Verdict::Abort : Verdict::Accept;
  return report;
}

// ---------------------------------------------------------------------------
// Step 4: raw key

struct Keys {
  std::string alice;  // n bits, '0'/'1'
  std::string bob;
  double mismatch_rate = 0.0;
};

inline std::string label_bits(int label) {
  return std::string{static_cast<char>('0' + pol_index(label)),
                     static_cast<char>('0' + spat_index(label))};
}

// First n/2 surviving key-candidate photons in transmission order, two bits
// each: the receiver keys off his recorded SIFT outcome, the sender off her
// return-leg outcome.
inline Keys derive_key(const std::vector<RoundRecord>& records, int n) {
  Keys keys;
  const long want = n / 2;
  long taken = 0;
  for (const RoundRecord& r : records) {
    if (r.group != CheckGroup::KeyCandidate) continue;
    keys.alice += label_bits(r.alice_label);
    keys.bob += label_bits(r.bob.label);
    if (++taken == want) break;
  }
  if (taken < want)
    throw InsufficientRounds("key derivation ran out of candidate rounds: have " +
                             std::to_string(taken) + " photons, need " + std::to_string(want));
  long mismatches = 0;
  for (std::size_t i = 0; i < keys.alice.size(); ++i)
    if (keys.alice[i] != keys.bob[i]) ++mismatches;
  keys.mismatch_rate = keys.alice.empty() ? 0.0 : static_cast<double>(mismatches) / keys.alice.size();
  return keys;
}

// ---------------------------------------------------------------------------
// Exact per-cell error probabilities (basis, label, receiver choice), used
// by the analysis layer and by exact-mode sessions.

inline double cell_error_probability(const AttackModel& attack, ProductBasis basis, int label,
                                     BobChoice choice) {
  double p = 0.0;
  for (const RoundBranch& br : enumerate_round(attack, basis, label, choice))
    if (round_error(basis, label, choice, br.bob_label, br.alice_label)) p += br.prob;
  return p;
}

// Expected error rates of the three check groups under ideal preparation
// frequencies ((Zp,Zs) half of all photons, the other bases one sixth each;
// labels uniform; CTRL and SIFT equally likely).
inline std::array<double, 3> expected_error_rates(const AttackModel& attack) {
  std::array<double, 3> rates{};  // ctrl, non-zz-sift, zz-sift
  for (ProductBasis b : kAllBases) {
    const double freq = (b == kBasisZZ) ? 0.5 : (1.0 / 6.0);
    for (int label = 0; label < 4; ++label) {
      rates[0] += freq * 0.25 * cell_error_probability(attack, b, label, BobChoice::Ctrl);
      const double sift = cell_error_probability(attack, b, label, BobChoice::Sift);
      if (b == kBasisZZ) rates[2] += 0.25 * sift;
      else rates[1] += (1.0 / 3.0) * 0.25 * sift;
    }
  }
  return rates;
}

// ---------------------------------------------------------------------------
// Full session

struct SessionCounts {
  std::array<long, 4> prepared_per_basis{};  // indexed like kAllBases
  long total = 0;
  long ctrl = 0;
  long sift = 0;
  long zz_sift = 0;
  long zz_sift_checked = 0;
  long key_candidates = 0;
};

struct ProbeMetrics {
  std::size_t probe_dim = 1;
  double holevo_bits = 0.0;         // key-label information in the SIFT probe ensemble
  double max_trace_distance = 0.0;  // worst pair among all 8 conditional probe states
};

// Label-information metrics of the attack's conditional probe states. An
// undetectable attack must leave the probe independent of both the prepared
// key label and the receiver's choice, so the trace-distance scan covers all
// pairs of the 8 states (4 labels x {CTRL, SIFT}). Holevo is taken over the
// SIFT ensemble, the rounds that carry key bits.
inline ProbeMetrics probe_metrics(const AttackModel& attack) {
  ProbeMetrics m;
  m.probe_dim = attack.probe_dim();
  std::vector<DensityMatrix> states;  // 0..3 SIFT, 4..7 CTRL
  for (int label = 0; label < 4; ++label)
    states.push_back(conditional_probe_state(attack, label, BobChoice::Sift));
  for (int label = 0; label < 4; ++label)
    states.push_back(conditional_probe_state(attack, label, BobChoice::Ctrl));
  std::vector<std::pair<double, DensityMatrix>> ensemble;
  for (int label = 0; label < 4; ++label) ensemble.emplace_back(0.25, states[label]);
  m.holevo_bits = holevo(ensemble);
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j)
      m.max_trace_distance = std::max(m.max_trace_distance, trace_distance(states[i], states[j]));
  return m;
}

struct SessionReport {
  ProtocolParams params;
  std::string attack_name;
  SessionCounts counts;                // populated in Monte-Carlo mode
  std::array<double, 3> rates{};       // ctrl, non-zz-sift, zz-sift; realized or expected
  Verdict verdict = Verdict::Accept;
  std::optional<ErrorReport> check;    // Monte-Carlo mode
  std::optional<Keys> keys;            // Monte-Carlo mode, Accept verdict only
  std::vector<RoundRecord> transcript; // Monte-Carlo mode
  ProbeMetrics eve;
};

// Run one session. Monte-Carlo mode samples the full transcript; exact mode
// computes the analytically expected group error rates (no transcript, no
// sampled keys) and applies the same thresholds to those.
inline SessionReport run_session(const ProtocolParams& params, const AttackModel& attack) {
  params.validate();
  SessionReport report;
  report.params = params;
  report.attack_name = attack.name();
  report.eve = probe_metrics(attack);

  if (params.mode == SessionMode::Exact) {
    report.rates = expected_error_rates(attack);
    const bool abort = report.rates[0] > params.ctrl_threshold ||
                       report.rates[1] > params.non_zz_sift_threshold ||
                       report.rates[2] > params.zz_sift_threshold;
    report.verdict = abort ? Verdict::Abort : Verdict::Accept;
    return report;
  }

  RandomStream rng(params.seed);
  const std::vector<PreparedPhoton> photons = prepare_batch(params, rng);

  std::vector<RoundRecord> records;
  records.reserve(photons.size());
  for (const PreparedPhoton& ph : photons) {
    StateVector joint = tensor(ph.state(), attack.initial_probe());
    joint = attack.forward(joint, rng);
    auto [action, outgoing] = bob_step(joint, rng);
    StateVector returned = attack.backward(outgoing, rng);
    const MeasurementResult alice = alice_return_measurement(returned, ph.basis, action.kind, rng);
    records.push_back({ph, action, alice.outcome, CheckGroup::KeyCandidate, false});
  }

  ErrorReport check = run_security_check(records, params, rng);
  report.rates = {check.ctrl.rate(), check.non_zz_sift.rate(), check.zz_sift.rate()};
  report.verdict = check.verdict;
  report.check = check;

  for (const RoundRecord& r : records) {
    report.counts.prepared_per_basis[basis_index(r.photon.basis)] += 1;
    if (r.bob.kind == BobChoice::Ctrl) report.counts.ctrl += 1;
    else {
      report.counts.sift += 1;
      if (r.photon.basis == kBasisZZ) report.counts.zz_sift += 1;
    }
    if (r.group == CheckGroup::ZZSiftCheck) report.counts.zz_sift_checked += 1;
    if (r.group == CheckGroup::KeyCandidate) report.counts.key_candidates += 1;
  }
  report.counts.total = static_cast<long>(records.size());

  if (report.verdict == Verdict::Accept) report.keys = derive_key(records, params.n);
  report.transcript = std::move(records);
  return report;
}

}  // namespace sqkd
