#pragma once

// Serialization boundary: JSON/CSV report writers and the user-supplied
// attack file loader. Everything written through here is deterministic for a
// given input (no timestamps, stable key order, fixed float formatting) so
// reruns produce byte-identical files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sqkd/analysis.hpp"
#include "sqkd/attack.hpp"
#include "sqkd/protocol.hpp"

namespace sqkd {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kAttackFileUnitaryTol = 1e-8;

using json = nlohmann::ordered_json;

// Fixed decimal formatting for CSV cells.
inline std::string csv_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::string(buf);
}

// Write via a temp file + rename so readers never observe a partial file.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Session reports

inline json session_to_json(const SessionReport& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["mode"] = session_mode_name(r.params.mode);
  j["attack"] = r.attack_name;
  j["params"] = {{"n", r.params.n},
                 {"delta", r.params.delta},
                 {"seed", r.params.seed},
                 {"thresholds",
                  {{"ctrl", r.params.ctrl_threshold},
                   {"non_zz_sift", r.params.non_zz_sift_threshold},
                   {"zz_sift", r.params.zz_sift_threshold}}}};
  j["verdict"] = verdict_name(r.verdict);
  j["error_rates"] = {
      {"ctrl", r.rates[0]}, {"non_zz_sift", r.rates[1]}, {"zz_sift", r.rates[2]}};
  if (r.check) {
    j["check_counts"] = {
        {"ctrl", {{"comparisons", r.check->ctrl.comparisons}, {"errors", r.check->ctrl.errors}}},
        {"non_zz_sift",
         {{"comparisons", r.check->non_zz_sift.comparisons},
          {"errors", r.check->non_zz_sift.errors}}},
        {"zz_sift",
         {{"comparisons", r.check->zz_sift.comparisons}, {"errors", r.check->zz_sift.errors}}}};
    j["counts"] = {{"total", r.counts.total},
                   {"prepared_per_basis",
                    {{"ZpZs", r.counts.prepared_per_basis[0]},
                     {"ZpXs", r.counts.prepared_per_basis[1]},
                     {"XpZs", r.counts.prepared_per_basis[2]},
                     {"XpXs", r.counts.prepared_per_basis[3]}}},
                   {"ctrl", r.counts.ctrl},
                   {"sift", r.counts.sift},
                   {"zz_sift", r.counts.zz_sift},
                   {"zz_sift_checked", r.counts.zz_sift_checked},
                   {"key_candidates", r.counts.key_candidates}};
  }
  if (r.keys) {
    j["keys"] = {{"length", static_cast<long>(r.keys->alice.size())},
                 {"alice", r.keys->alice},
                 {"bob", r.keys->bob},
                 {"mismatch_rate", r.keys->mismatch_rate}};
  } else {
    j["keys"] = nullptr;
  }
  j["eve"] = {{"probe_dim", r.eve.probe_dim},
              {"holevo_bits", r.eve.holevo_bits},
              {"max_probe_trace_distance", r.eve.max_trace_distance}};
  return j;
}

// Per-round transcript. Labels are numeric (0..3, polarization-major within
// the row's basis); bob_label is -1 on CTRL rounds.
inline std::string transcript_csv(const SessionReport& r) {
  std::ostringstream out;
  out << "index,basis,prepared_label,bob_action,bob_label,alice_label,group,error_flag\n";
  for (const RoundRecord& rec : r.transcript) {
    out << rec.photon.index << ',' << basis_name(rec.photon.basis) << ',' << rec.photon.label
        << ',' << bob_choice_name(rec.bob.kind) << ',' << rec.bob.label << ',' << rec.alice_label
        << ',' << check_group_name(rec.group) << ',' << (rec.error ? 1 : 0) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Robustness reports

inline json robustness_to_json(const RobustnessReport& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["attack"] = r.attack_name;
  j["max_detection"] = r.max_detection;
  j["max_probe_trace_distance"] = r.max_probe_trace_distance;
  j["holevo_bits"] = r.holevo_bits;
  j["tolerances"] = {{"detection", r.detect_tol}, {"information", r.info_tol}};
  j["verdict"] = robustness_verdict_name(r.verdict);
  return j;
}

inline json random_sweep_to_json(const RandomSweepSummary& s) {
  return json{{"samples", s.samples},
              {"detectable", s.detectable},
              {"consistent_with_theorem1", s.consistent},
              {"violations", s.violations},
              {"min_detection_among_detectable", s.detectable > 0 ? json(s.min_detection) : json()},
              {"max_info_at_zero_detection", s.max_info_at_zero_detection}};
}

inline json detection_profile_to_json(const DetectionProfile& p) {
  json cells = json::array();
  for (int b = 0; b < 4; ++b)
    for (int label = 0; label < 4; ++label)
      for (int choice = 0; choice < 2; ++choice)
        cells.push_back({{"basis", basis_name(kAllBases[b])},
                         {"label", label},
                         {"state", state_name(kAllBases[b], label)},
                         {"bob", choice == 0 ? "CTRL" : "SIFT"},
                         {"detection", p.cells[b][label][choice]}});
  return json{{"cells", cells},
              {"group_rates",
               {{"ctrl", p.group_rates[0]},
                {"non_zz_sift", p.group_rates[1]},
                {"zz_sift", p.group_rates[2]}}},
              {"max_detection", p.max_cell()}};
}

// ---------------------------------------------------------------------------
// Sweep and efficiency reports

inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << "param,detection,holevo_bits,trace_distance\n";
  for (const SweepPoint& p : points)
    out << csv_double(p.param) << ',' << csv_double(p.detection) << ','
        << csv_double(p.holevo_bits) << ',' << csv_double(p.trace_distance) << '\n';
  return out.str();
}

inline json efficiency_to_json(const std::array<EfficiencyRow, 3>& rows) {
  json arr = json::array();
  for (const EfficiencyRow& r : rows) {
    arr.push_back({{"protocol", r.protocol},
                   {"key_bits", r.key_bits},
                   {"quantum_units", r.quantum_units},
                   {"quantum_derivation", r.quantum_derivation},
                   {"classical_bits", r.classical_bits},
                   {"photons_per_n_1pd", r.photons_coeff},
                   {"qubits_per_n_1pd", r.qubits_coeff},
                   {"qubits_per_photon", r.qubits_per_photon},
                   {"initial_state_kinds", r.initial_state_kinds},
                   {"efficiency_percent", r.efficiency_percent}});
  }
  return json{{"schema_version", kSchemaVersion},
              {"efficiency_definition", "key bits / (consumed qubits + classical bits), delta -> 0"},
              {"rows", arr}};
}

inline std::string efficiency_text_table(const std::array<EfficiencyRow, 3>& rows) {
  const std::vector<std::string> headers{"protocol", "b_k", "b_q",       "b_c",
                                         "eta",      "c_q", "state kinds"};
  std::vector<std::vector<std::string>> body;
  for (const EfficiencyRow& r : rows) {
    char eta[32];
    std::snprintf(eta, sizeof(eta), "%.2f%%", r.efficiency_percent);
    body.push_back({r.protocol, r.key_bits, r.quantum_units, r.classical_bits, eta,
                    std::to_string(r.qubits_per_photon), std::to_string(r.initial_state_kinds)});
  }
  std::vector<std::size_t> width(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    width[c] = headers[c].size();
    for (const auto& row : body) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c] << std::string(width[c] - row[c].size(), ' ');
      out << (c + 1 < row.size() ? "  " : "");
    }
    out << '\n';
  };
  emit(headers);
  std::vector<std::string> rule;
  for (std::size_t w : width) rule.push_back(std::string(w, '-'));
  emit(rule);
  for (const auto& row : body) emit(row);
  return out.str();
}

// ---------------------------------------------------------------------------
// User-supplied attack files
//
// Schema: {"probe_dim": P, "forward": M, "backward": M?, "initial_probe": V?,
// "name": S?} where M is a row-major (4P)x(4P) matrix of [re, im] pairs and V
// a vector of P pairs. Missing backward means identity; missing initial_probe
// means the first probe basis state. Both matrices must be unitary within
// 1e-8.

inline cx parse_complex_entry(const json& e, const std::string& where) {
  if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
    throw AttackFileError(where + ": expected a [re, im] number pair");
  const double re = e[0].get<double>(), im = e[1].get<double>();
  if (!std::isfinite(re) || !std::isfinite(im))
    throw AttackFileError(where + ": non-finite entry");
  return cx{re, im};
}

inline UnitaryMatrix parse_attack_matrix(const json& m, std::size_t dim, const std::string& leg) {
  if (!m.is_array() || m.size() != dim)
    throw AttackFileError(leg + " matrix: expected " + std::to_string(dim) + " rows");
  std::vector<cx> entries(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!m[i].is_array() || m[i].size() != dim)
      throw AttackFileError(leg + " matrix row " + std::to_string(i) + ": expected " +
                            std::to_string(dim) + " entries");
    for (std::size_t j = 0; j < dim; ++j)
      entries[i * dim + j] = parse_complex_entry(
          m[i][j], leg + " matrix entry [" + std::to_string(i) + "][" + std::to_string(j) + "]");
  }
  try {
    return UnitaryMatrix(dim, std::move(entries), kAttackFileUnitaryTol);
  } catch (const StateError& e) {
    throw AttackFileError(leg + " " + e.what());
  }
}

inline std::unique_ptr<AttackModel> load_attack(const json& j, const std::string& default_name,
                                                std::size_t probe_cap = kDefaultProbeCap) {
  if (!j.is_object()) throw AttackFileError("attack file: top level must be a JSON object");
  if (!j.contains("probe_dim") || !j["probe_dim"].is_number_integer())
    throw AttackFileError("attack file: missing integer field 'probe_dim'");
  const long pd = j["probe_dim"].get<long>();
  if (pd < 1 || pd > static_cast<long>(probe_cap))
    throw AttackFileError("attack file: probe_dim must lie in [1, " + std::to_string(probe_cap) +
                          "], got " + std::to_string(pd));
  const std::size_t probe_dim = static_cast<std::size_t>(pd);
  const std::size_t dim = kPhotonDim * probe_dim;

  if (!j.contains("forward")) throw AttackFileError("attack file: missing 'forward' matrix");
  UnitaryMatrix fwd = parse_attack_matrix(j["forward"], dim, "forward");
  UnitaryMatrix bwd = j.contains("backward") ? parse_attack_matrix(j["backward"], dim, "backward")
                                             : UnitaryMatrix::identity(dim);

  StateVector probe0 = StateVector::basis_state(probe_dim, 0);
  if (j.contains("initial_probe")) {
    const json& v = j["initial_probe"];
    if (!v.is_array() || v.size() != probe_dim)
      throw AttackFileError("attack file: initial_probe must have probe_dim entries");
    std::vector<cx> amps(probe_dim);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < probe_dim; ++i) {
      amps[i] = parse_complex_entry(v[i], "initial_probe[" + std::to_string(i) + "]");
      norm2 += std::norm(amps[i]);
    }
    if (std::abs(std::sqrt(norm2) - 1.0) > kAttackFileUnitaryTol)
      throw AttackFileError("attack file: initial_probe norm is " +
                            std::to_string(std::sqrt(norm2)) + ", expected 1");
    const double inv = 1.0 / std::sqrt(norm2);
    for (cx& a : amps) a *= inv;
    probe0 = StateVector(std::move(amps));
  }

  std::string name = default_name;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw AttackFileError("attack file: 'name' must be a string");
    name = j["name"].get<std::string>();
  }
  return std::make_unique<UnitaryPairAttack>(std::move(name), std::move(probe0), std::move(fwd),
                                             std::move(bwd));
}

inline std::unique_ptr<AttackModel> load_attack_file(const std::filesystem::path& path,
                                                     std::size_t probe_cap = kDefaultProbeCap) {
  std::ifstream in(path);
  if (!in) throw AttackFileError("cannot open attack file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw AttackFileError("attack file " + path.string() + ": invalid JSON: " + e.what());
  }
  return load_attack(j, path.stem().string(), probe_cap);
}

}  // namespace sqkd
